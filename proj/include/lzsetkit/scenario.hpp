/**
 * @file scenario.hpp
 * @brief JSON scenario loading and the runners behind the lzset tool. A
 *        scenario file carries a "kind" field ("estimate", "afd-design",
 *        "afd-verify" or "sets-demo") plus the model/set data for that run;
 *        results are written as CSV/JSON files into an output directory.
 *
 * Exit-code contract shared with the CLI: 0 success, 2 malformed input or
 * schema violations, 3 no result (infeasible design / node limit), 4 numerical
 * failure inside a solver.
 */

#ifndef LZSETKIT_SCENARIO_HPP
#define LZSETKIT_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "lzsetkit/estimator.hpp"
#include "lzsetkit/line_zonotope.hpp"

namespace lzsetkit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitNoResult = 3;
inline constexpr int kExitNumerical = 4;

/// @brief Optional command-line overrides applied on top of scenario values.
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> method;  ///< "lz" or "cz"
    int jobs = 1;
};

/// @brief Shortest round-trip double formatting (17 significant digits via
///        std::to_chars); used for every numeric CSV/JSON field we emit.
std::string format_double(double v);

/// @brief Writes content to path atomically (temp file + rename).
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

/// @brief Logs a progress line to stderr when the LZ_SETKIT_LOG environment
///        variable is set to a non-empty value other than "0".
void log_line(const std::string& msg);

Matrix json_matrix(const nlohmann::json& j);
Vector json_vector(const nlohmann::json& j);

/// @brief Parses a set description. Kinds: "zonotope" (center, generators),
///        "box" (center, half_widths), "singleton" (center), "realspace" (dim),
///        "constrained" (center, generators, A, b), "line" (full M,G,c,S,A,b).
LineZonotope parse_set(const nlohmann::json& j);

DescriptorModel parse_model(const nlohmann::json& j);

/// @brief Loads and minimally validates a scenario file (must be a JSON object
///        with a string "kind"). Throws std::runtime_error on parse errors.
nlohmann::json load_scenario(const std::filesystem::path& file);

int run_estimate(const nlohmann::json& sc, const std::filesystem::path& out_dir,
                 const RunOverrides& ov);
int run_afd_design(const nlohmann::json& sc, const std::filesystem::path& out_dir,
                   const RunOverrides& ov);
int run_afd_verify(const nlohmann::json& sc, const std::filesystem::path& out_dir,
                   const RunOverrides& ov);
int run_sets_demo(const nlohmann::json& sc, const std::filesystem::path& out_dir,
                  const RunOverrides& ov);

/// @brief Loads the file, dispatches on "kind" and maps exceptions to the exit
///        codes above. The only entry point the CLI needs.
int run_scenario(const std::filesystem::path& scenario_file,
                 const std::filesystem::path& out_dir, const RunOverrides& ov);

}  // namespace lzsetkit

#endif  // LZSETKIT_SCENARIO_HPP
