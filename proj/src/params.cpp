#include "params.hpp"

#include "errors.hpp"

namespace dlsm {

int ParamStore::add(const std::string& name, MatRM value) {
    if (index_.count(name)) throw UsageError("duplicate parameter name: " + name);
    int id = static_cast<int>(values_.size());
    index_.emplace(name, id);
    names_.push_back(name);
    values_.push_back(std::move(value));
    return id;
}

int ParamStore::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw UsageError("unknown parameter: " + name);
    return it->second;
}

int64_t ParamStore::total_entries() const {
    int64_t n = 0;
    for (const auto& v : values_) n += v.size();
    return n;
}

std::vector<double> ParamStore::flatten() const {
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(total_entries()));
    for (const auto& v : values_)
        flat.insert(flat.end(), v.data(), v.data() + v.size());
    return flat;
}

void ParamStore::unflatten(const std::vector<double>& flat) {
    size_t off = 0;
    for (auto& v : values_) {
        if (off + static_cast<size_t>(v.size()) > flat.size())
            throw UsageError("unflatten: size mismatch");
        std::copy(flat.begin() + off, flat.begin() + off + v.size(), v.data());
        off += static_cast<size_t>(v.size());
    }
    if (off != flat.size()) throw UsageError("unflatten: size mismatch");
}

} // namespace dlsm
