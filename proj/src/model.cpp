#include "annosim/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "annosim/error.hpp"
#include "annosim/io.hpp"
#include "annosim/rng.hpp"

namespace annosim {

using nlohmann::json;

void TrainConfig::validate() const {
    if (!(learning_rate > 0)) throw ValidationError("learning_rate must be > 0");
    if (weight_decay < 0) throw ValidationError("weight_decay must be >= 0");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (!(adam_beta1 > 0 && adam_beta1 < 1)) throw ValidationError("adam_beta1 must be in (0,1)");
    if (!(adam_beta2 > 0 && adam_beta2 < 1)) throw ValidationError("adam_beta2 must be in (0,1)");
    if (!(adam_epsilon > 0)) throw ValidationError("adam_epsilon must be > 0");
}

std::vector<std::string> tokenize(std::string_view text, bool lowercase) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            current.push_back(lowercase ? static_cast<char>(std::tolower(static_cast<unsigned char>(ch)))
                                        : ch);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Matrix featurize(const Dataset& ds, const FeatureConfig& cfg) {
    const std::size_t n = ds.size();
    if (cfg.source == FeatureSource::provided_vectors) {
        const auto fdim = ds.feature_dim();
        if (!fdim) throw ValidationError("featurize: dataset has no feature vectors");
        if (cfg.dimension > 0 && static_cast<std::size_t>(cfg.dimension) != *fdim) {
            throw ValidationError("featurize: configured dimension " + std::to_string(cfg.dimension) +
                                  " does not match data dimension " + std::to_string(*fdim));
        }
        Matrix x(n, *fdim);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& inst = ds.instances[i];
            if (!inst.features) throw ValidationError("featurize: instance " + inst.id + " has no features");
            for (std::size_t j = 0; j < *fdim; ++j) x.at(i, j) = (*inst.features)[j];
        }
        return x;
    }

    if (cfg.dimension < 1) throw ValidationError("featurize: hashed_bow needs dimension >= 1");
    const auto f = static_cast<std::size_t>(cfg.dimension);
    Matrix x(n, f);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& inst = ds.instances[i];
        if (!inst.text) throw ValidationError("featurize: instance " + inst.id + " has no text");
        for (const std::string& tok : tokenize(*inst.text, cfg.lowercase)) {
            const std::uint64_t h = stream_seed({seed_tag::hashed_bow, cfg.hash_seed, fnv1a64(tok)});
            x.at(i, h % f) += 1.0;
        }
        double norm = 0.0;
        for (std::size_t j = 0; j < f; ++j) norm += x.at(i, j) * x.at(i, j);
        if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (std::size_t j = 0; j < f; ++j) x.at(i, j) /= norm;
        }
    }
    return x;
}

namespace {

void check_shapes(const ModelState& model, const Matrix& features) {
    if (static_cast<int>(features.cols) != model.feature_dim) {
        throw ValidationError("feature dimension " + std::to_string(features.cols) +
                              " does not match model dimension " + std::to_string(model.feature_dim));
    }
}

// logits -> probabilities, in place per row buffer.
void softmax_row(std::span<double> z) {
    double zmax = z[0];
    for (double v : z) zmax = std::max(zmax, v);
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

void logits_for(const ModelState& model, const Matrix& features, std::size_t row,
                std::vector<double>& z) {
    const auto c = static_cast<std::size_t>(model.num_classes);
    const auto f = static_cast<std::size_t>(model.feature_dim);
    for (std::size_t j = 0; j < c; ++j) {
        double acc = model.bias[j];
        const double* w = model.weights.data.data() + j * f;
        const double* x = features.data.data() + row * f;
        for (std::size_t d = 0; d < f; ++d) acc += w[d] * x[d];
        z[j] = acc;
    }
}

// Cross-entropy of one row in the numerically exact log-sum-exp form:
// loss = logsumexp(z) - sum_j t_j z_j. For one-hot targets the sum reduces
// to z_gold bit-for-bit.
double row_loss(std::span<const double> z, const TrainTargets& targets, std::size_t row) {
    double zmax = z[0];
    for (double v : z) zmax = std::max(zmax, v);
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    const double lse = zmax + std::log(sum);
    double dot = 0.0;
    if (targets.mode == TargetMode::ml) {
        dot = z[static_cast<std::size_t>(targets.labels[row])];
    } else {
        for (std::size_t j = 0; j < z.size(); ++j) dot += targets.dists.at(row, j) * z[j];
    }
    return lse - dot;
}

void check_targets(const Matrix& features, const TrainTargets& targets) {
    if (features.rows == 0) throw ValidationError("fit: empty training set");
    if (features.rows != targets.size()) {
        throw ValidationError("fit: " + std::to_string(features.rows) + " feature rows vs " +
                              std::to_string(targets.size()) + " targets");
    }
    if (targets.num_classes < 2) throw ValidationError("fit: need at least 2 classes");
    if (targets.mode == TargetMode::ld) {
        if (targets.dists.rows != targets.size() ||
            static_cast<int>(targets.dists.cols) != targets.num_classes) {
            throw ValidationError("fit: LD target matrix shape mismatch");
        }
        for (std::size_t i = 0; i < targets.dists.rows; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < targets.dists.cols; ++j) {
                const double v = targets.dists.at(i, j);
                if (v < 0.0) throw ValidationError("fit: negative LD target entry");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-9) {
                throw ValidationError("fit: LD target row " + std::to_string(i) + " sums to " +
                                      std::to_string(sum));
            }
        }
    }
    for (double v : features.data) {
        if (!std::isfinite(v)) throw ValidationError("fit: non-finite value in features");
    }
}

struct AdamSlot {
    std::vector<double> m;
    std::vector<double> v;
    explicit AdamSlot(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

}  // namespace

LossGrad loss_and_grad(const ModelState& model, const Matrix& features,
                       const TrainTargets& targets, std::span<const std::size_t> batch) {
    const auto c = static_cast<std::size_t>(model.num_classes);
    const auto f = static_cast<std::size_t>(model.feature_dim);
    LossGrad out;
    out.grad_weights = Matrix(c, f);
    out.grad_bias.assign(c, 0.0);
    if (batch.empty()) throw ValidationError("loss_and_grad: empty batch");

    std::vector<double> z(c);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (std::size_t row : batch) {
        logits_for(model, features, row, z);
        out.loss += row_loss(z, targets, row);
        softmax_row(z);
        // dL/dz = p - t, averaged over the batch
        for (std::size_t j = 0; j < c; ++j) {
            double delta = z[j];
            if (targets.mode == TargetMode::ml) {
                if (static_cast<std::size_t>(targets.labels[row]) == j) delta -= 1.0;
            } else {
                delta -= targets.dists.at(row, j);
            }
            delta *= inv_b;
            out.grad_bias[j] += delta;
            double* gw = out.grad_weights.data.data() + j * f;
            const double* x = features.data.data() + row * f;
            for (std::size_t d = 0; d < f; ++d) gw[d] += delta * x[d];
        }
    }
    out.loss *= inv_b;
    return out;
}

double mean_cross_entropy(const ModelState& model, const Matrix& features,
                          const TrainTargets& targets) {
    check_shapes(model, features);
    if (features.rows != targets.size()) throw ValidationError("mean_cross_entropy: size mismatch");
    const auto c = static_cast<std::size_t>(model.num_classes);
    std::vector<double> z(c);
    double total = 0.0;
    for (std::size_t i = 0; i < features.rows; ++i) {
        logits_for(model, features, i, z);
        total += row_loss(z, targets, i);
    }
    return total / static_cast<double>(features.rows);
}

FitResult fit(const Matrix& features, const TrainTargets& targets, const TrainConfig& cfg,
              const std::vector<int>* record_gold) {
    cfg.validate();
    check_targets(features, targets);
    if (record_gold) {
        if (record_gold->size() != targets.size()) {
            throw ValidationError("fit: record_gold length mismatch");
        }
        for (int g : *record_gold) {
            if (g < 0 || g >= targets.num_classes) {
                throw ValidationError("fit: record_gold label out of range");
            }
        }
    }

    const std::size_t n = features.rows;
    const auto c = static_cast<std::size_t>(targets.num_classes);
    const auto f = features.cols;

    FitResult result;
    ModelState& model = result.model;
    model.num_classes = targets.num_classes;
    model.feature_dim = static_cast<int>(f);
    model.weights = Matrix(c, f);
    model.bias.assign(c, 0.0);
    model.config = cfg;

    if (record_gold) {
        result.dynamics = DynamicsRecord{Matrix(n, static_cast<std::size_t>(cfg.epochs))};
    }

    const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
    AdamSlot adam_w(c * f);
    AdamSlot adam_b(c);
    long long step = 0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<double> z(c);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        SplitMix64 rng(stream_seed({seed_tag::batch_order, cfg.seed,
                                    static_cast<std::uint64_t>(epoch)}));
        fisher_yates(order, rng);

        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t len = std::min(batch, n - start);
            const LossGrad lg =
                loss_and_grad(model, features, targets, {order.data() + start, len});
            if (!std::isfinite(lg.loss)) {
                throw Error("fit: non-finite loss at epoch " + std::to_string(epoch) +
                            ", batch starting at " + std::to_string(start));
            }
            ++step;
            const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
            for (std::size_t i = 0; i < c * f; ++i) {
                const double g = lg.grad_weights.data[i];
                adam_w.m[i] = cfg.adam_beta1 * adam_w.m[i] + (1.0 - cfg.adam_beta1) * g;
                adam_w.v[i] = cfg.adam_beta2 * adam_w.v[i] + (1.0 - cfg.adam_beta2) * g * g;
                const double mhat = adam_w.m[i] / bc1;
                const double vhat = adam_w.v[i] / bc2;
                // decoupled weight decay on the weights only
                model.weights.data[i] -= cfg.learning_rate *
                    (mhat / (std::sqrt(vhat) + cfg.adam_epsilon) +
                     cfg.weight_decay * model.weights.data[i]);
            }
            for (std::size_t i = 0; i < c; ++i) {
                const double g = lg.grad_bias[i];
                adam_b.m[i] = cfg.adam_beta1 * adam_b.m[i] + (1.0 - cfg.adam_beta1) * g;
                adam_b.v[i] = cfg.adam_beta2 * adam_b.v[i] + (1.0 - cfg.adam_beta2) * g * g;
                const double mhat = adam_b.m[i] / bc1;
                const double vhat = adam_b.v[i] / bc2;
                model.bias[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
            }
        }

        // End-of-epoch pass: training loss, and gold-label dynamics if asked.
        double epoch_loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            logits_for(model, features, i, z);
            epoch_loss += row_loss(z, targets, i);
            if (record_gold) {
                softmax_row(z);
                result.dynamics->gold_prob.at(i, static_cast<std::size_t>(epoch)) =
                    z[static_cast<std::size_t>((*record_gold)[i])];
            }
        }
        result.epoch_losses.push_back(epoch_loss / static_cast<double>(n));
    }

    model.final_loss = result.epoch_losses.back();
    return result;
}

ModelState fit_null(const TrainTargets& targets, const TrainConfig& cfg) {
    const Matrix empty_features(targets.size(), 0);
    return fit(empty_features, targets, cfg, nullptr).model;
}

Matrix predict_proba(const ModelState& model, const Matrix& features) {
    check_shapes(model, features);
    const auto c = static_cast<std::size_t>(model.num_classes);
    Matrix probs(features.rows, c);
    std::vector<double> z(c);
    for (std::size_t i = 0; i < features.rows; ++i) {
        logits_for(model, features, i, z);
        softmax_row(z);
        for (std::size_t j = 0; j < c; ++j) probs.at(i, j) = z[j];
    }
    return probs;
}

std::vector<double> null_distribution(const ModelState& model) {
    if (model.feature_dim != 0) throw ValidationError("null_distribution: model is not input-free");
    std::vector<double> z = model.bias;
    softmax_row(z);
    return z;
}

void save_model(const ModelState& model, const std::filesystem::path& path) {
    json j{{"num_classes", model.num_classes},
           {"feature_dim", model.feature_dim},
           {"weights", model.weights.data},
           {"bias", model.bias},
           {"final_loss", model.final_loss},
           {"config",
            {{"learning_rate", model.config.learning_rate},
             {"weight_decay", model.config.weight_decay},
             {"epochs", model.config.epochs},
             {"batch_size", model.config.batch_size},
             {"seed", model.config.seed},
             {"adam_beta1", model.config.adam_beta1},
             {"adam_beta2", model.config.adam_beta2},
             {"adam_epsilon", model.config.adam_epsilon}}}};
    write_text_atomic(path, j.dump(2) + "\n");
}

ModelState load_model(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ValidationError("model file " + path.string() + ": " + e.what());
    }
    ModelState m;
    m.num_classes = j.at("num_classes").get<int>();
    m.feature_dim = j.at("feature_dim").get<int>();
    m.weights = Matrix(static_cast<std::size_t>(m.num_classes), static_cast<std::size_t>(m.feature_dim));
    m.weights.data = j.at("weights").get<std::vector<double>>();
    if (m.weights.data.size() != m.weights.rows * m.weights.cols) {
        throw ValidationError("model file: weight size mismatch");
    }
    m.bias = j.at("bias").get<std::vector<double>>();
    if (m.bias.size() != static_cast<std::size_t>(m.num_classes)) {
        throw ValidationError("model file: bias size mismatch");
    }
    m.final_loss = j.value("final_loss", 0.0);
    if (j.contains("config")) {
        const json& c = j["config"];
        m.config.learning_rate = c.value("learning_rate", m.config.learning_rate);
        m.config.weight_decay = c.value("weight_decay", m.config.weight_decay);
        m.config.epochs = c.value("epochs", m.config.epochs);
        m.config.batch_size = c.value("batch_size", m.config.batch_size);
        m.config.seed = c.value("seed", m.config.seed);
        m.config.adam_beta1 = c.value("adam_beta1", m.config.adam_beta1);
        m.config.adam_beta2 = c.value("adam_beta2", m.config.adam_beta2);
        m.config.adam_epsilon = c.value("adam_epsilon", m.config.adam_epsilon);
    }
    return m;
}

void write_dynamics_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                        const DynamicsRecord& dynamics) {
    if (ids.size() != dynamics.num_instances()) {
        throw ValidationError("write_dynamics_csv: id count mismatch");
    }
    std::string out = "instance_id,epoch,gold_prob\n";
    for (std::size_t i = 0; i < dynamics.num_instances(); ++i) {
        for (std::size_t e = 0; e < dynamics.num_epochs(); ++e) {
            out += csv_escape(ids[i]);
            out += ',';
            out += std::to_string(e);
            out += ',';
            out += format_double(dynamics.gold_prob.at(i, e));
            out += '\n';
        }
    }
    write_text_atomic(path, out);
}

namespace {

// Splits one CSV line, honoring double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

}  // namespace

DynamicsRecord read_dynamics_csv(const std::filesystem::path& path,
                                 std::vector<std::string>* ids_out) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dynamics file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("dynamics file is empty: " + path.string());

    // id -> (epoch -> prob); ordered by first appearance
    std::vector<std::string> ids;
    std::map<std::string, std::map<std::size_t, double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != 3) throw ValidationError("dynamics file: bad row: " + line);
        try {
            if (!rows.count(fields[0])) ids.push_back(fields[0]);
            rows[fields[0]][static_cast<std::size_t>(std::stoul(fields[1]))] = std::stod(fields[2]);
        } catch (const std::exception&) {
            throw ValidationError("dynamics file: bad numeric field in row: " + line);
        }
    }
    if (ids.empty()) throw ValidationError("dynamics file has no rows: " + path.string());
    const std::size_t epochs = rows[ids.front()].size();
    DynamicsRecord dyn{Matrix(ids.size(), epochs)};
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& per_epoch = rows[ids[i]];
        if (per_epoch.size() != epochs) {
            throw ValidationError("dynamics file: uneven epoch counts at id " + ids[i]);
        }
        for (const auto& [e, p] : per_epoch) {
            if (e >= epochs) throw ValidationError("dynamics file: epoch out of range at id " + ids[i]);
            dyn.gold_prob.at(i, e) = p;
        }
    }
    if (ids_out) *ids_out = std::move(ids);
    return dyn;
}

}  // namespace annosim
