#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "mtgl/tree.hpp"

namespace mtgl {

struct TreeBundle {
    TreePtr tree;
    std::map<std::string, TreeProcess> processes;
};

// {depth, child_counts, leaf_probs, processes: {name: [BFS node values]}}
nlohmann::json to_json(const TreeBundle& bundle);
TreeBundle bundle_from_json(const nlohmann::json& j);

std::string read_file(const std::string& path);
// Writes through a temporary file and renames, so readers never see a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace mtgl
