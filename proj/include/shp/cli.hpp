#pragma once

// Command implementations behind the `shp` executable. Each command writes its
// artifacts under `out` and echoes its resolved configuration into its JSON output.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "shp/error.hpp"

namespace shp::cli {

enum class Format { Csv, Json };

struct CommonOptions {
    std::string config;                  // JSON config path; empty for defaults
    std::optional<std::uint64_t> seed;   // overrides the config seed
    std::filesystem::path out = ".";
    unsigned threads = 1;
    std::optional<Format> format;        // unset writes every format a command supports
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUnexpected = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;

int exit_code(ErrorKind kind);

void cmd_simulate(const CommonOptions& opt);
void cmd_bin(const CommonOptions& opt, const std::string& events_path, double delta, std::optional<double> horizon);
void cmd_fit(const CommonOptions& opt, const std::string& counts_path, const std::string& graph_path, double delta);
void cmd_search(const CommonOptions& opt, const std::string& counts_path, double delta);
void cmd_evaluate(const CommonOptions& opt, const std::string& truth_path, const std::string& estimated_path);
void cmd_experiment(const CommonOptions& opt);

struct IdentifiabilityOptions {
    std::optional<double> alpha, mu_x, mu_y, alpha_reference;
    std::optional<std::size_t> n, trials, dispersion_n;
};
void cmd_identifiability(const CommonOptions& opt, const IdentifiabilityOptions& id);

// Parses argv and dispatches; returns the process exit status.
int run(int argc, char** argv);

}  // namespace shp::cli
