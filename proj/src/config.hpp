#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dlsm {

enum class ReconMode { Distance, InnerProduct };

// Every field is addressable by key in the flat "key = value" config file and
// as a --key CLI flag; CLI wins over file, file wins over defaults.
struct ModelConfig {
    std::vector<int> encoder_sizes = {64, 32};
    std::vector<int> decoder_sizes = {32, 50}; // strictly increasing
    int latent_dim = 16;
    ReconMode mode = ReconMode::Distance;
    bool undirected = false;

    double stick_v = 0.9;
    double temperature = 0.5;
    double temperature_end = 0.5; // != temperature => linear anneal over epochs
    double prior_sigma2 = 1.0;
    double prior_activity_shape = 1.0;   // xi
    double prior_popularity_shape = 1.0; // psi

    double learning_rate = 0.01;
    int epochs = 500;
    int patience = 50;
    int kl_warmup_epochs = 50;
    double dropout = 0.0;     // on encoder hidden states during training
    bool restore_best = true; // return the best-validation-AUC parameters
    uint64_t seed = 1;
    double pos_weight = 0.0; // 0 => (n(n-1) - m) / m on the training adjacency
    int neg_subsample_factor = 5;
    int recon_subsample_threshold = 5000;
    double leaky_relu_slope = 0.2;

    double train_ratio = 0.85;
    double test_ratio = 0.10;
    double val_ratio = 0.05;

    void validate() const;
    // canonical key=value text, sorted by key; config_hash() hashes this
    std::string serialize() const;
    uint64_t config_hash() const;
    std::string hash_hex() const;

    void set(const std::string& key, const std::string& value);
    static ModelConfig from_file(const std::string& path);
    static ModelConfig from_map(const std::map<std::string, std::string>& kv);
    static const std::vector<std::string>& known_keys();
};

} // namespace dlsm
