#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "rng.hpp"

namespace dlsm {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (cell.empty()) continue;
        try {
            out.push_back(std::stoi(cell));
        } catch (const std::exception&) {
            throw UsageError("config key '" + key + "': bad integer list element '" + cell + "'");
        }
    }
    if (out.empty()) throw UsageError("config key '" + key + "': empty list");
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': bad number '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int d = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': bad integer '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw UsageError("config key '" + key + "': bad boolean '" + v + "'");
}

std::string list_to_string(const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

std::string fmt_double(double d) {
    std::ostringstream os;
    os.precision(17);
    os << d;
    return os.str();
}

} // namespace

void ModelConfig::validate() const {
    if (encoder_sizes.empty()) throw UsageError("encoder_sizes must not be empty");
    if (decoder_sizes.empty()) throw UsageError("decoder_sizes must not be empty");
    for (int k : encoder_sizes)
        if (k < 1) throw UsageError("encoder_sizes entries must be positive");
    for (int g : decoder_sizes)
        if (g < 1) throw UsageError("decoder_sizes entries must be positive");
    for (size_t i = 1; i < decoder_sizes.size(); ++i)
        if (decoder_sizes[i] <= decoder_sizes[i - 1])
            throw UsageError("decoder_sizes must be strictly increasing");
    if (encoder_sizes.size() != decoder_sizes.size())
        throw UsageError("encoder_sizes and decoder_sizes must have the same layer count");
    if (latent_dim < 1) throw UsageError("latent_dim must be positive");
    if (!(stick_v > 0.0 && stick_v < 1.0)) throw UsageError("stick_v must lie in (0,1)");
    if (!(temperature > 0.0)) throw UsageError("temperature must be positive");
    if (!(temperature_end > 0.0)) throw UsageError("temperature_end must be positive");
    if (!(prior_sigma2 > 0.0)) throw UsageError("prior_sigma2 must be positive");
    if (!(prior_activity_shape > 0.0)) throw UsageError("prior_activity_shape must be positive");
    if (!(prior_popularity_shape > 0.0)) throw UsageError("prior_popularity_shape must be positive");
    if (!(learning_rate > 0.0)) throw UsageError("learning_rate must be positive");
    if (epochs < 1) throw UsageError("epochs must be positive");
    if (patience < 1) throw UsageError("patience must be positive");
    if (kl_warmup_epochs < 0) throw UsageError("kl_warmup_epochs must be non-negative");
    if (dropout < 0.0 || dropout >= 1.0) throw UsageError("dropout must lie in [0,1)");
    if (pos_weight < 0.0) throw UsageError("pos_weight must be non-negative");
    if (neg_subsample_factor < 1) throw UsageError("neg_subsample_factor must be positive");
    if (recon_subsample_threshold < 1) throw UsageError("recon_subsample_threshold must be positive");
    if (std::abs(train_ratio + test_ratio + val_ratio - 1.0) > 1e-9)
        throw UsageError("split ratios must sum to 1");
    if (!(train_ratio > 0.0 && test_ratio > 0.0 && val_ratio > 0.0))
        throw UsageError("split ratios must be positive");
}

std::string ModelConfig::serialize() const {
    std::map<std::string, std::string> kv;
    kv["encoder_sizes"] = list_to_string(encoder_sizes);
    kv["decoder_sizes"] = list_to_string(decoder_sizes);
    kv["latent_dim"] = std::to_string(latent_dim);
    kv["mode"] = mode == ReconMode::Distance ? "distance" : "inner_product";
    kv["undirected"] = undirected ? "true" : "false";
    kv["stick_v"] = fmt_double(stick_v);
    kv["temperature"] = fmt_double(temperature);
    kv["temperature_end"] = fmt_double(temperature_end);
    kv["prior_sigma2"] = fmt_double(prior_sigma2);
    kv["prior_activity_shape"] = fmt_double(prior_activity_shape);
    kv["prior_popularity_shape"] = fmt_double(prior_popularity_shape);
    kv["learning_rate"] = fmt_double(learning_rate);
    kv["epochs"] = std::to_string(epochs);
    kv["patience"] = std::to_string(patience);
    kv["kl_warmup_epochs"] = std::to_string(kl_warmup_epochs);
    kv["dropout"] = fmt_double(dropout);
    kv["restore_best"] = restore_best ? "true" : "false";
    kv["seed"] = std::to_string(seed);
    kv["pos_weight"] = fmt_double(pos_weight);
    kv["neg_subsample_factor"] = std::to_string(neg_subsample_factor);
    kv["recon_subsample_threshold"] = std::to_string(recon_subsample_threshold);
    kv["leaky_relu_slope"] = fmt_double(leaky_relu_slope);
    kv["train_ratio"] = fmt_double(train_ratio);
    kv["test_ratio"] = fmt_double(test_ratio);
    kv["val_ratio"] = fmt_double(val_ratio);
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

uint64_t ModelConfig::config_hash() const {
    std::string s = serialize();
    return fnv1a64(s.data(), s.size());
}

std::string ModelConfig::hash_hex() const {
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash()));
    return buf;
}

const std::vector<std::string>& ModelConfig::known_keys() {
    static const std::vector<std::string> keys = {
        "encoder_sizes",        "decoder_sizes",
        "latent_dim",           "mode",
        "undirected",           "stick_v",
        "temperature",          "temperature_end",
        "prior_sigma2",         "prior_activity_shape",
        "prior_popularity_shape", "learning_rate",
        "epochs",               "patience",
        "kl_warmup_epochs",     "dropout",
        "restore_best",         "seed",
        "pos_weight",           "neg_subsample_factor",
        "recon_subsample_threshold", "leaky_relu_slope",
        "train_ratio",          "test_ratio",
        "val_ratio"};
    return keys;
}

void ModelConfig::set(const std::string& key, const std::string& raw) {
    std::string value = trim(raw);
    if (key == "encoder_sizes")
        encoder_sizes = parse_int_list(key, value);
    else if (key == "decoder_sizes")
        decoder_sizes = parse_int_list(key, value);
    else if (key == "latent_dim")
        latent_dim = parse_int(key, value);
    else if (key == "mode") {
        if (value == "distance")
            mode = ReconMode::Distance;
        else if (value == "inner_product")
            mode = ReconMode::InnerProduct;
        else
            throw UsageError("config key 'mode': expected distance or inner_product, got '" +
                             value + "'");
    } else if (key == "undirected")
        undirected = parse_bool(key, value);
    else if (key == "stick_v")
        stick_v = parse_double(key, value);
    else if (key == "temperature")
        temperature = parse_double(key, value);
    else if (key == "temperature_end")
        temperature_end = parse_double(key, value);
    else if (key == "prior_sigma2")
        prior_sigma2 = parse_double(key, value);
    else if (key == "prior_activity_shape")
        prior_activity_shape = parse_double(key, value);
    else if (key == "prior_popularity_shape")
        prior_popularity_shape = parse_double(key, value);
    else if (key == "learning_rate")
        learning_rate = parse_double(key, value);
    else if (key == "epochs")
        epochs = parse_int(key, value);
    else if (key == "patience")
        patience = parse_int(key, value);
    else if (key == "kl_warmup_epochs")
        kl_warmup_epochs = parse_int(key, value);
    else if (key == "dropout")
        dropout = parse_double(key, value);
    else if (key == "restore_best")
        restore_best = parse_bool(key, value);
    else if (key == "seed")
        seed = static_cast<uint64_t>(std::stoull(value));
    else if (key == "pos_weight")
        pos_weight = value == "auto" ? 0.0 : parse_double(key, value);
    else if (key == "neg_subsample_factor")
        neg_subsample_factor = parse_int(key, value);
    else if (key == "recon_subsample_threshold")
        recon_subsample_threshold = parse_int(key, value);
    else if (key == "leaky_relu_slope")
        leaky_relu_slope = parse_double(key, value);
    else if (key == "train_ratio")
        train_ratio = parse_double(key, value);
    else if (key == "test_ratio")
        test_ratio = parse_double(key, value);
    else if (key == "val_ratio")
        val_ratio = parse_double(key, value);
    else
        throw UsageError("unknown config key '" + key + "'");
}

ModelConfig ModelConfig::from_map(const std::map<std::string, std::string>& kv) {
    ModelConfig c;
    for (const auto& [k, v] : kv) c.set(k, v);
    return c;
}

ModelConfig ModelConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    ModelConfig c;
    std::string line;
    int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        c.set(key, value);
    }
    return c;
}

} // namespace dlsm
