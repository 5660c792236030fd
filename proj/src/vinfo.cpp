#include "annosim/vinfo.hpp"

#include <cmath>

#include "annosim/error.hpp"
#include "annosim/io.hpp"

namespace annosim {

namespace {

constexpr double kProbFloor = 1e-12;

double bits(double p, int& clamped) {
    if (p < kProbFloor) {
        ++clamped;
        p = kProbFloor;
    }
    return -std::log2(p);
}

void check_gold(std::span<const int> gold, int num_classes) {
    if (gold.empty()) throw ValidationError("v-information: empty gold set");
    for (int g : gold) {
        if (g < 0 || g >= num_classes) {
            throw ValidationError("v-information: gold label " + std::to_string(g) +
                                  " outside [0, " + std::to_string(num_classes) + ")");
        }
    }
}

}  // namespace

const char* gold_source_name(GoldSource source) {
    return source == GoldSource::ml_majority ? "ml_majority" : "ld_argmax";
}

double v_entropy(const ModelState& null_model, std::span<const int> gold, int* clamped) {
    check_gold(gold, null_model.num_classes);
    const std::vector<double> dist = null_distribution(null_model);
    int clamps = 0;
    double total = 0.0;
    for (int g : gold) total += bits(dist[static_cast<std::size_t>(g)], clamps);
    if (clamped) *clamped = clamps;
    return total / static_cast<double>(gold.size());
}

double conditional_v_entropy(const ModelState& model, const Matrix& features,
                             std::span<const int> gold, int* clamped) {
    check_gold(gold, model.num_classes);
    if (features.rows != gold.size()) {
        throw ValidationError("conditional_v_entropy: feature/gold size mismatch");
    }
    const Matrix probs = predict_proba(model, features);
    int clamps = 0;
    double total = 0.0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        total += bits(probs.at(i, static_cast<std::size_t>(gold[i])), clamps);
    }
    if (clamped) *clamped = clamps;
    return total / static_cast<double>(gold.size());
}

double v_information(double h_y, double h_y_given_x) {
    return h_y - h_y_given_x;
}

double pvi(const ModelState& model, const ModelState& null_model,
           std::span<const double> feature, int gold_label) {
    if (gold_label < 0 || gold_label >= model.num_classes) {
        throw ValidationError("pvi: gold label out of range");
    }
    Matrix x(1, feature.size());
    for (std::size_t i = 0; i < feature.size(); ++i) x.at(0, i) = feature[i];
    const Matrix probs = predict_proba(model, x);
    const std::vector<double> dist = null_distribution(null_model);
    int clamps = 0;
    const double null_bits = bits(dist[static_cast<std::size_t>(gold_label)], clamps);
    const double model_bits = bits(probs.at(0, static_cast<std::size_t>(gold_label)), clamps);
    return null_bits - model_bits;
}

VInfoReport compute_vinfo(const ModelState& model, const ModelState& null_model,
                          const Matrix& features, std::span<const int> gold,
                          GoldSource gold_source, std::string eval_split) {
    if (model.num_classes != null_model.num_classes) {
        throw ValidationError("compute_vinfo: model class counts differ");
    }
    check_gold(gold, model.num_classes);
    if (features.rows != gold.size()) {
        throw ValidationError("compute_vinfo: feature/gold size mismatch");
    }

    VInfoReport report;
    report.gold_source = gold_source;
    report.eval_split = std::move(eval_split);
    report.gold.assign(gold.begin(), gold.end());

    const std::vector<double> null_dist = null_distribution(null_model);
    const Matrix probs = predict_proba(model, features);

    const std::size_t n = gold.size();
    report.pvi.reserve(n);
    report.p_null.reserve(n);
    report.p_model.reserve(n);
    double sum_null_bits = 0.0;
    double sum_model_bits = 0.0;
    int clamps = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto g = static_cast<std::size_t>(gold[i]);
        const double pn = null_dist[g];
        const double pm = probs.at(i, g);
        const double null_bits = bits(pn, clamps);
        const double model_bits = bits(pm, clamps);
        report.p_null.push_back(pn);
        report.p_model.push_back(pm);
        report.pvi.push_back(null_bits - model_bits);
        sum_null_bits += null_bits;
        sum_model_bits += model_bits;
    }
    report.h_y = sum_null_bits / static_cast<double>(n);
    report.h_y_given_x = sum_model_bits / static_cast<double>(n);
    report.v_information = v_information(report.h_y, report.h_y_given_x);
    report.clamped = clamps;
    report.negative = report.v_information < 0.0;
    return report;
}

void write_pvi_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                   const VInfoReport& report) {
    if (ids.size() != report.pvi.size()) throw ValidationError("write_pvi_csv: id count mismatch");
    std::string out = "instance_id,pvi,gold,p_null,p_model\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out += csv_escape(ids[i]);
        out += ',';
        out += format_double(report.pvi[i]);
        out += ',';
        out += std::to_string(report.gold[i]);
        out += ',';
        out += format_double(report.p_null[i]);
        out += ',';
        out += format_double(report.p_model[i]);
        out += '\n';
    }
    write_text_atomic(path, out);
}

}  // namespace annosim
