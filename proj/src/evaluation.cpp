#include "evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "metrics.hpp"

namespace dlsm {

std::string EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["task"] = task;
    if (auc) j["auc"] = *auc;
    if (ap) j["ap"] = *ap;
    if (accuracy) j["accuracy"] = *accuracy;
    j["seed"] = seed;
    j["split_seed"] = split_seed;
    j["config_hash"] = config_hash;
    if (!factor_distributions.empty()) {
        nlohmann::ordered_json fd = nlohmann::ordered_json::array();
        for (const auto& s : factor_distributions) {
            nlohmann::ordered_json js;
            js["name"] = s.name;
            js["x"] = s.x;
            js["y"] = s.y;
            fd.push_back(js);
        }
        j["factor_distributions"] = fd;
    }
    return j.dump(2);
}

EvalReport link_prediction_eval(const TrainedModel& tm, const EdgeSplit& split) {
    const Model& model = *tm.model;
    MeanLatents latents = model.mean_pass();

    std::vector<Edge> pairs;
    std::vector<int> labels;
    pairs.reserve(split.test_pos.size() + split.test_neg.size());
    for (const auto& e : split.test_pos) {
        pairs.push_back(e);
        labels.push_back(1);
    }
    for (const auto& e : split.test_neg) {
        pairs.push_back(e);
        labels.push_back(0);
    }
    Eigen::VectorXd s = model.score_edges(latents, pairs);
    std::vector<double> scores(s.data(), s.data() + s.size());

    EvalReport report;
    report.task = "lp";
    report.auc = auc(scores, labels);
    report.ap = average_precision(scores, labels);
    report.seed = model.config().seed;
    report.split_seed = split.seed;
    report.config_hash = model.config().hash_hex();
    return report;
}

EvalReport community_detection_eval(const TrainedModel& tm, const std::vector<int>& truth, int k,
                                    uint64_t kmeans_seed) {
    const Model& model = *tm.model;
    if (static_cast<int32_t>(truth.size()) != model.node_count())
        throw UsageError("community_detection_eval: truth size must equal node count");
    if (k < 1) throw UsageError("community_detection_eval: k must be positive");

    MeanLatents latents = model.mean_pass();

    std::vector<int> keep;
    for (size_t i = 0; i < truth.size(); ++i)
        if (truth[i] >= 0) keep.push_back(static_cast<int>(i));
    if (keep.empty()) throw UsageError("community_detection_eval: no labeled nodes");

    Eigen::MatrixXd pts(keep.size(), latents.positions.cols());
    std::vector<int> kept_truth;
    kept_truth.reserve(keep.size());
    for (size_t r = 0; r < keep.size(); ++r) {
        pts.row(static_cast<Eigen::Index>(r)) = latents.positions.row(keep[r]);
        kept_truth.push_back(truth[keep[r]]);
    }

    std::vector<int> pred = kmeans(pts, k, kmeans_seed == 0 ? model.config().seed : kmeans_seed);

    EvalReport report;
    report.task = "cd";
    report.accuracy = clustering_accuracy(pred, kept_truth);
    report.seed = model.config().seed;
    report.split_seed = tm.split_seed;
    report.config_hash = model.config().hash_hex();
    return report;
}

namespace {

Series histogram_series(const std::string& name, const std::vector<double>& values, int bins) {
    Series s;
    s.name = name;
    if (values.empty()) return s;
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    if (hi <= lo) { // degenerate: single spike
        s.x = {lo};
        s.y = {1.0};
        return s;
    }
    double width = (hi - lo) / bins;
    std::vector<double> counts(bins, 0.0);
    for (double v : values) {
        int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
        counts[b] += 1.0;
    }
    double norm = static_cast<double>(values.size()) * width;
    for (int b = 0; b < bins; ++b) {
        s.x.push_back(lo + (b + 0.5) * width);
        s.y.push_back(counts[b] / norm);
    }
    return s;
}

Series ccd_series(const std::string& name, std::vector<double> values) {
    Series s;
    s.name = name;
    std::sort(values.begin(), values.end());
    size_t n = values.size();
    for (size_t i = 0; i < n; ++i) {
        if (i > 0 && values[i] == values[i - 1]) continue;
        s.x.push_back(values[i]);
        s.y.push_back(static_cast<double>(n - i) / static_cast<double>(n)); // P(X >= x)
    }
    return s;
}

} // namespace

EvalReport degree_factor_report(const TrainedModel& tm) {
    const Model& model = *tm.model;
    MeanLatents latents = model.mean_pass();
    const int32_t n = model.node_count();

    std::vector<int32_t> dout = tm.graph.out_degrees();
    std::vector<int32_t> din = tm.graph.in_degrees();
    std::vector<double> out_d(dout.begin(), dout.end());
    std::vector<double> in_d(din.begin(), din.end());

    std::vector<double> act_norm(n), pop_norm(n), act_recip(n), pop_recip(n);
    for (int32_t i = 0; i < n; ++i) {
        act_norm[i] = latents.activity.row(i).norm();
        pop_norm[i] = latents.popularity.row(i).norm();
        act_recip[i] = 1.0 / act_norm[i];
        pop_recip[i] = 1.0 / pop_norm[i];
    }

    EvalReport report;
    report.task = "factors";
    report.seed = model.config().seed;
    report.split_seed = tm.split_seed;
    report.config_hash = model.config().hash_hex();
    report.factor_distributions.push_back(histogram_series("pdd_out_degree", out_d, 50));
    report.factor_distributions.push_back(histogram_series("pdd_in_degree", in_d, 50));
    report.factor_distributions.push_back(
        histogram_series("pdd_reciprocal_activity_norm", act_recip, 50));
    report.factor_distributions.push_back(
        histogram_series("pdd_reciprocal_popularity_norm", pop_recip, 50));
    report.factor_distributions.push_back(ccd_series("ccd_activity_norm", act_norm));
    report.factor_distributions.push_back(ccd_series("ccd_popularity_norm", pop_norm));
    return report;
}

void export_embeddings(const TrainedModel& tm, const std::string& path) {
    const Model& model = *tm.model;
    MeanLatents latents = model.mean_pass();
    const int32_t n = model.node_count();
    const Eigen::Index d = latents.positions.cols();

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write embeddings: " + path);
    out.precision(17);

    out << "label";
    for (Eigen::Index k = 0; k < d; ++k) out << ",z" << k;
    for (Eigen::Index k = 0; k < d; ++k) out << ",gamma" << k;
    for (Eigen::Index k = 0; k < d; ++k) out << ",delta" << k;
    for (size_t l = 0; l < latents.layers.size(); ++l)
        for (Eigen::Index g = 0; g < latents.layers[l].membership_hard.cols(); ++g)
            out << ",s" << (l + 1) << "_" << g;
    out << '\n';

    for (int32_t i = 0; i < n; ++i) {
        out << model.id_map()[i];
        for (Eigen::Index k = 0; k < d; ++k) out << ',' << latents.positions(i, k);
        for (Eigen::Index k = 0; k < d; ++k) out << ',' << latents.activity(i, k);
        for (Eigen::Index k = 0; k < d; ++k) out << ',' << latents.popularity(i, k);
        for (const auto& layer : latents.layers)
            for (Eigen::Index g = 0; g < layer.membership_hard.cols(); ++g)
                out << ',' << layer.membership_hard(i, g);
        out << '\n';
    }
}

std::vector<int> load_truth_labels(const DirectedGraph& g, const std::string& path,
                                   int min_community_size) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open truth labels: " + path);

    std::unordered_map<std::string, int32_t> ids;
    for (int32_t i = 0; i < g.n; ++i) ids.emplace(g.id_map[i], i);

    std::vector<int> labels(g.n, -1);
    std::map<std::string, int> community_ids;
    std::string line;
    int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::istringstream ls(line);
        std::string node, comm;
        if (!(ls >> node >> comm))
            throw DataError("malformed truth label at line " + std::to_string(lineno));
        auto it = ids.find(node);
        if (it == ids.end()) continue; // labels for dropped nodes are ignored
        auto [cit, inserted] = community_ids.emplace(comm, static_cast<int>(community_ids.size()));
        labels[it->second] = cit->second;
    }

    if (min_community_size > 1) {
        std::map<int, int> counts;
        for (int l : labels)
            if (l >= 0) counts[l]++;
        for (auto& l : labels)
            if (l >= 0 && counts[l] < min_community_size) l = -1;
    }
    return labels;
}

void write_series_csv(const std::vector<Series>& series, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write series csv: " + path);
    out.precision(17);
    out << "series,x,y\n";
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i)
            out << s.name << ',' << s.x[i] << ',' << s.y[i] << '\n';
}

} // namespace dlsm
