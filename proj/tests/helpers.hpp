#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "graph.hpp"

namespace testutil {

// Scratch directory wiped on destruction.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("dlsm_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
};

inline std::string write_file(const TempDir& dir, const std::string& name,
                              const std::string& content) {
    std::string p = dir.file(name);
    std::ofstream out(p);
    out << content;
    return p;
}

inline dlsm::DirectedGraph graph_from_edges(int32_t n, std::vector<dlsm::Edge> edges) {
    dlsm::DirectedGraph g;
    g.n = n;
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edges = std::move(edges);
    for (int32_t i = 0; i < n; ++i) g.id_map.push_back(std::to_string(i));
    return g;
}

} // namespace testutil
