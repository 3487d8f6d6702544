#include "mtgl/serialize.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mtgl {

nlohmann::json to_json(const TreeBundle& bundle) {
    const auto& tr = *bundle.tree;
    nlohmann::json j;
    j["depth"] = tr.depth();
    j["child_counts"] = tr.child_counts();
    j["leaf_probs"] = tr.leaf_probs();
    nlohmann::json procs = nlohmann::json::object();
    for (const auto& [name, p] : bundle.processes) {
        if (p.tree() != bundle.tree) throw std::invalid_argument("process " + name + " lives on another tree");
        if (p.dim() == 1) {
            procs[name] = p.values();
        } else {
            nlohmann::json rows = nlohmann::json::array();
            for (std::size_t v = 0; v < tr.node_count(); ++v) {
                std::vector<double> row(p.values().begin() + static_cast<std::ptrdiff_t>(v * p.dim()),
                                        p.values().begin() + static_cast<std::ptrdiff_t>((v + 1) * p.dim()));
                rows.push_back(row);
            }
            procs[name] = rows;
        }
    }
    j["processes"] = procs;
    return j;
}

TreeBundle bundle_from_json(const nlohmann::json& j) {
    int depth = j.at("depth").get<int>();
    auto probs = j.at("leaf_probs").get<std::vector<double>>();
    std::vector<int> counts;
    if (j.contains("child_counts")) {
        counts = j.at("child_counts").get<std::vector<int>>();
    } else {
        // Uniform branching is implied when only the leaf count is given.
        int b = 1;
        while (depth > 0 && static_cast<std::size_t>(std::pow(b, depth) + 0.5) < probs.size()) ++b;
        std::size_t internal = 0, width = 1;
        for (int n = 0; n < depth; ++n, width *= b) internal += width;
        counts.assign(internal, b);
    }
    TreeBundle out;
    out.tree = std::make_shared<const FiltrationTree>(depth, std::move(counts), std::move(probs));
    if (j.contains("processes")) {
        for (const auto& [name, arr] : j.at("processes").items()) {
            if (!arr.is_array()) throw std::invalid_argument("process " + name + " is not an array");
            std::vector<double> values;
            std::size_t dim = 1;
            if (!arr.empty() && arr.front().is_array()) {
                dim = arr.front().size();
                for (const auto& row : arr) {
                    if (row.size() != dim) throw std::invalid_argument("ragged vector process " + name);
                    for (const auto& x : row) values.push_back(x.get<double>());
                }
            } else {
                values = arr.get<std::vector<double>>();
            }
            out.processes.emplace(name, TreeProcess(out.tree, std::move(values), dim));
        }
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace mtgl
