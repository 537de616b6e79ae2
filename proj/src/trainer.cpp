#include "trainer.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "errors.hpp"
#include "metrics.hpp"
#include "rng.hpp"

namespace dlsm {

EdgeSplit TrainedModel::resplit() const {
    SplitRatios r{model->config().train_ratio, model->config().test_ratio,
                  model->config().val_ratio};
    return split_edges(graph, r, split_seed);
}

namespace {

class Adam {
public:
    Adam(const ParamStore& params, double lr) : lr_(lr) {
        for (size_t i = 0; i < params.count(); ++i) {
            m_.push_back(MatRM::Zero(params.value(static_cast<int>(i)).rows(),
                                     params.value(static_cast<int>(i)).cols()));
            v_.push_back(m_.back());
        }
    }

    void step(ParamStore& params, const std::vector<MatRM>& grads) {
        ++t_;
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        double bc1 = 1.0 - std::pow(b1, t_);
        double bc2 = 1.0 - std::pow(b2, t_);
        for (size_t i = 0; i < grads.size(); ++i) {
            MatRM& p = params.value(static_cast<int>(i));
            m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
            v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i].cwiseProduct(grads[i]);
            for (Eigen::Index k = 0; k < p.size(); ++k) {
                double mh = m_[i].data()[k] / bc1;
                double vh = v_[i].data()[k] / bc2;
                p.data()[k] -= lr_ * mh / (std::sqrt(vh) + eps);
            }
        }
    }

private:
    double lr_;
    int64_t t_ = 0;
    std::vector<MatRM> m_, v_;
};

double validation_auc(const Model& model, const EdgeSplit& split) {
    MeanLatents latents = model.mean_pass();
    std::vector<Edge> pairs;
    std::vector<int> labels;
    pairs.reserve(split.val_pos.size() + split.val_neg.size());
    for (const auto& e : split.val_pos) {
        pairs.push_back(e);
        labels.push_back(1);
    }
    for (const auto& e : split.val_neg) {
        pairs.push_back(e);
        labels.push_back(0);
    }
    Eigen::VectorXd s = model.score_edges(latents, pairs);
    std::vector<double> scores(s.data(), s.data() + s.size());
    return auc(scores, labels);
}

} // namespace

TrainedModel train(const DirectedGraph& graph, const EdgeSplit& split, const ModelConfig& cfg) {
    cfg.validate();
    if (split.train_pos.empty()) throw UsageError("train: empty training edge set");

    TrainedModel tm;
    tm.graph = graph;
    tm.split_seed = split.seed;
    tm.model = std::make_unique<Model>(graph, split.train_pos, cfg);
    Model& model = *tm.model;

    Adam opt(model.params(), cfg.learning_rate);
    std::vector<MatRM> best_params;
    int since_best = 0;
    int nonfinite_streak = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double kl_scale = cfg.kl_warmup_epochs > 0
                              ? std::min(1.0, static_cast<double>(epoch + 1) /
                                                  static_cast<double>(cfg.kl_warmup_epochs))
                              : 1.0;
        double frac = cfg.epochs > 1 ? static_cast<double>(epoch) /
                                           static_cast<double>(cfg.epochs - 1)
                                     : 0.0;
        double temperature = cfg.temperature + (cfg.temperature_end - cfg.temperature) * frac;
        uint64_t noise_seed = substream(cfg.seed, "sampling", {static_cast<uint64_t>(epoch)})
                                  .next_u64();

        TrainHistoryRow row;
        row.epoch = epoch;
        try {
            ad::Tape tape;
            Model::Forward fwd = model.training_pass(tape, noise_seed, kl_scale, temperature);
            tape.backward(fwd.total);
            std::vector<MatRM> grads;
            grads.reserve(model.params().count());
            for (size_t i = 0; i < model.params().count(); ++i) {
                int leaf = fwd.param_leaf_ids[i];
                if (tape.has_grad(leaf))
                    grads.push_back(tape.grad(leaf));
                else
                    grads.push_back(MatRM::Zero(model.params().value(static_cast<int>(i)).rows(),
                                                model.params().value(static_cast<int>(i)).cols()));
            }
            opt.step(model.params(), grads);
            row.loss = fwd.breakdown;
            nonfinite_streak = 0;
        } catch (const NumericError&) {
            if (++nonfinite_streak >= 3)
                throw NumericError("training diverged: non-finite loss for 3 consecutive epochs");
            row.loss = LossBreakdown{};
            row.loss.total = std::numeric_limits<double>::quiet_NaN();
            tm.history.push_back(row);
            continue;
        }

        row.val_auc = validation_auc(model, split);
        tm.history.push_back(row);

        if (row.val_auc > tm.best_val_auc || tm.best_epoch < 0) {
            tm.best_val_auc = row.val_auc;
            tm.best_epoch = epoch;
            best_params.clear();
            for (size_t i = 0; i < model.params().count(); ++i)
                best_params.push_back(model.params().value(static_cast<int>(i)));
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }

    if (cfg.restore_best && !best_params.empty())
        for (size_t i = 0; i < best_params.size(); ++i)
            model.params().value(static_cast<int>(i)) = best_params[i];
    return tm;
}

// ---------------------------------------------------------------------------
// checkpoint io

namespace {

constexpr char kMagic[8] = {'D', 'L', 'S', 'M', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

struct ByteSink {
    std::string bytes;
    template <typename T>
    void put(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        bytes.append(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void put_str(const std::string& s) {
        put<uint64_t>(s.size());
        bytes.append(s);
    }
    void put_mat(const MatRM& m) {
        put<int64_t>(m.rows());
        put<int64_t>(m.cols());
        bytes.append(reinterpret_cast<const char*>(m.data()),
                     static_cast<size_t>(m.size()) * sizeof(double));
    }
};

struct ByteSource {
    const std::string& bytes;
    size_t pos = 0;
    template <typename T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        if (pos + sizeof(T) > bytes.size()) throw DataError("checkpoint truncated");
        T v;
        std::memcpy(&v, bytes.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }
    std::string get_str() {
        auto len = get<uint64_t>();
        if (pos + len > bytes.size()) throw DataError("checkpoint truncated");
        std::string s = bytes.substr(pos, len);
        pos += len;
        return s;
    }
    MatRM get_mat() {
        auto rows = get<int64_t>();
        auto cols = get<int64_t>();
        size_t count = static_cast<size_t>(rows) * static_cast<size_t>(cols);
        if (pos + count * sizeof(double) > bytes.size()) throw DataError("checkpoint truncated");
        MatRM m(rows, cols);
        std::memcpy(m.data(), bytes.data() + pos, count * sizeof(double));
        pos += count * sizeof(double);
        return m;
    }
};

} // namespace

void save_checkpoint(const TrainedModel& tm, const std::string& path) {
    ByteSink sink;
    sink.bytes.append(kMagic, sizeof(kMagic));
    sink.put<uint32_t>(kVersion);
    const ModelConfig& cfg = tm.model->config();
    sink.put<uint64_t>(cfg.config_hash());
    sink.put_str(cfg.serialize());
    sink.put<uint64_t>(tm.split_seed);

    sink.put<int32_t>(tm.graph.n);
    sink.put<uint64_t>(tm.graph.edges.size());
    for (const auto& [s, t] : tm.graph.edges) {
        sink.put<int32_t>(s);
        sink.put<int32_t>(t);
    }
    sink.put<uint64_t>(tm.graph.id_map.size());
    for (const auto& label : tm.graph.id_map) sink.put_str(label);
    sink.put<uint8_t>(tm.graph.attributes ? 1 : 0);
    if (tm.graph.attributes) sink.put_mat(MatRM(*tm.graph.attributes));

    const ParamStore& params = tm.model->params();
    sink.put<uint64_t>(params.count());
    for (size_t i = 0; i < params.count(); ++i) {
        sink.put_str(params.name(static_cast<int>(i)));
        sink.put_mat(params.value(static_cast<int>(i)));
    }
    sink.put<int32_t>(tm.best_epoch);
    sink.put<double>(tm.best_val_auc);

    uint64_t checksum = fnv1a64(sink.bytes.data(), sink.bytes.size());
    sink.put<uint64_t>(checksum);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out.write(sink.bytes.data(), static_cast<std::streamsize>(sink.bytes.size()));
    if (!out) throw DataError("short write on checkpoint: " + path);
}

TrainedModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string bytes = ss.str();
    if (bytes.size() < sizeof(kMagic) + sizeof(uint32_t) + sizeof(uint64_t))
        throw DataError("checkpoint truncated");

    uint64_t stored_checksum;
    std::memcpy(&stored_checksum, bytes.data() + bytes.size() - sizeof(uint64_t),
                sizeof(uint64_t));
    uint64_t actual = fnv1a64(bytes.data(), bytes.size() - sizeof(uint64_t));
    if (stored_checksum != actual)
        throw DataError("checkpoint checksum mismatch (file truncated or corrupted)");

    ByteSource src{bytes};
    char magic[8];
    std::memcpy(magic, bytes.data(), sizeof(magic));
    src.pos = sizeof(magic);
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("not a checkpoint file: " + path);
    auto version = src.get<uint32_t>();
    if (version != kVersion)
        throw DataError("incompatible checkpoint version " + std::to_string(version) +
                        " (expected " + std::to_string(kVersion) + ")");

    auto stored_hash = src.get<uint64_t>();
    std::string cfg_text = src.get_str();
    auto split_seed = src.get<uint64_t>();

    // parse config from the embedded text
    ModelConfig cfg;
    {
        std::istringstream cs(cfg_text);
        std::string line;
        while (std::getline(cs, line)) {
            if (line.empty()) continue;
            size_t eq = line.find('=');
            std::string key = line.substr(0, eq);
            std::string value = line.substr(eq + 1);
            auto trim = [](std::string s) {
                size_t a = s.find_first_not_of(" \t");
                size_t b = s.find_last_not_of(" \t");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            cfg.set(trim(key), trim(value));
        }
    }
    if (cfg.config_hash() != stored_hash)
        fprintf(stderr, "warning: checkpoint config hash mismatch (stored %016llx)\n",
                static_cast<unsigned long long>(stored_hash));

    TrainedModel tm;
    tm.split_seed = split_seed;
    tm.graph.n = src.get<int32_t>();
    auto m = src.get<uint64_t>();
    tm.graph.edges.reserve(m);
    for (uint64_t k = 0; k < m; ++k) {
        int32_t s = src.get<int32_t>();
        int32_t t = src.get<int32_t>();
        tm.graph.edges.emplace_back(s, t);
    }
    auto labels = src.get<uint64_t>();
    for (uint64_t k = 0; k < labels; ++k) tm.graph.id_map.push_back(src.get_str());
    if (src.get<uint8_t>()) tm.graph.attributes = Eigen::MatrixXd(src.get_mat());

    SplitRatios ratios{cfg.train_ratio, cfg.test_ratio, cfg.val_ratio};
    EdgeSplit split = split_edges(tm.graph, ratios, split_seed);
    tm.model = std::make_unique<Model>(tm.graph, split.train_pos, cfg);

    auto param_count = src.get<uint64_t>();
    if (param_count != tm.model->params().count())
        throw DataError("checkpoint parameter count mismatch");
    for (uint64_t k = 0; k < param_count; ++k) {
        std::string name = src.get_str();
        MatRM value = src.get_mat();
        MatRM& dst = tm.model->params().value(name);
        if (dst.rows() != value.rows() || dst.cols() != value.cols())
            throw DataError("checkpoint parameter shape mismatch for " + name);
        dst = value;
    }
    tm.best_epoch = src.get<int32_t>();
    tm.best_val_auc = src.get<double>();
    return tm;
}

void write_history_csv(const std::vector<TrainHistoryRow>& history, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write history csv: " + path);
    out << "epoch,kl_z,kl_s,kl_gamma,kl_delta,recon,total,val_auc\n";
    out.precision(17);
    for (const auto& row : history) {
        out << row.epoch << ',' << row.loss.kl_positions << ',' << row.loss.kl_memberships << ','
            << row.loss.kl_activity << ',' << row.loss.kl_popularity << ',' << row.loss.recon
            << ',' << row.loss.total << ',' << row.val_auc << '\n';
    }
}

} // namespace dlsm
