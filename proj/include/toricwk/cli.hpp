#pragma once

#include "toricwk/io.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace toricwk::cli {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct RunFlags {
    std::string out;
    std::optional<double> rel_tol;
    int threads = 1;
};

// Named files produced by a run, in insertion order.
class Artifacts {
public:
    void add(const std::string& name, std::string content);
    const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }
    const std::string* find(const std::string& name) const;
    // Writes every file and a manifest.json into dir.
    void write(const std::string& dir, const json& header) const;
    json manifest(const json& header) const;

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

struct RunResult {
    int exit_code = kExitOk;
    json verdict;
    Artifacts artifacts;
};

// Executes a problem file. Library errors become error.json and a nonzero exit code.
RunResult run(const json& problem, const RunFlags& flags);
RunResult reproduce(const std::string& name, const RunFlags& flags);

const std::vector<std::string>& task_names();
const std::vector<std::string>& case_names();

std::string fnv1a_hex(const std::string& data);

// Command-line entry point.
int main(int argc, char** argv);

}  // namespace toricwk::cli
