#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "sparse.hpp"

namespace dlsm {

// Named dense parameters in a stable registration order; the order defines
// the layout used by the optimizer state and the flattened gradient checks.
class ParamStore {
public:
    int add(const std::string& name, MatRM value);
    int index_of(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.count(name) > 0; }

    MatRM& value(int i) { return values_[i]; }
    const MatRM& value(int i) const { return values_[i]; }
    MatRM& value(const std::string& name) { return values_[index_of(name)]; }
    const MatRM& value(const std::string& name) const { return values_[index_of(name)]; }
    const std::string& name(int i) const { return names_[i]; }

    size_t count() const { return values_.size(); }
    int64_t total_entries() const;

    std::vector<double> flatten() const;
    void unflatten(const std::vector<double>& flat);

private:
    std::vector<std::string> names_;
    std::vector<MatRM> values_;
    std::unordered_map<std::string, int> index_;
};

} // namespace dlsm
