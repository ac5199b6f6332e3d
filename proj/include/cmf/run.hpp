#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "cmf/data_term.hpp"
#include "cmf/solver_common.hpp"
#include "cmf/solver_pf.hpp"

namespace cmf {

enum class InputKind { complex_pair, rgb, raw_field };

std::string to_string(InputKind kind);
InputKind parse_input_kind(const std::string& name);

/// Everything one reconstruction needs. Serialises to flat `key = value`
/// text whose keys are the long CLI flag names.
///
/// Inputs by kind:
///   complex-pair  `input` (real) and `input_imag` (imaginary): two grayscale
///                 PGMs, 8 or 16 bit, samples mapped to [-1, 1], or two
///                 spatial field files
///   rgb           `input`: PPM, 8 or 16 bit
///   raw-field     `input`: spatial field file of angles, unit weights
struct RunConfig {
    std::string input;
    std::string input_imag;
    InputKind kind = InputKind::complex_pair;
    int n_theta = 32;
    SolverKind solver = SolverKind::al;
    SolverConfig solver_config = SolverConfig::al_defaults();
    PFFlowWeight pf_flow_weight = PFFlowWeight::normalized;
    int power = 1;
    double scale = 1.0;
    double smoothness = 0.3;
    std::string smoothness_map; ///< spatial or cyclic field file; overrides `smoothness`
    std::string out_labels;     ///< spatial field of label angles (required)
    std::string out_u;
    std::string out_trace;
    std::string out_preview;    ///< .pgm grayscale or .ppm hue wheel
    std::string out_data;       ///< the D field used
    std::string out_config;     ///< echo of this config

    /// Throws std::invalid_argument when fields are inconsistent, the output
    /// paths are not distinct or a required path is missing.
    void validate() const;

    bool operator==(const RunConfig&) const = default;
};

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
/// `[section]` headers are rejected.
KeyValues parse_key_values(const std::string& text);

/// Serialises every field needed to reproduce the run, doubles in shortest
/// round-trip form, keys sorted.
std::string format_key_values(const KeyValues& kv);

/// Builds a config from key/values. Solver parameters that are absent take
/// the defaults of the chosen solver. A `prefix` key fills any unset output
/// path as prefix_labels.cmf, prefix_u.cmf, prefix_trace.csv, prefix_preview.pgm
/// and prefix_config.txt. Unknown keys throw.
RunConfig run_config_from(const KeyValues& kv);

/// Inverse of run_config_from for a fully resolved config.
KeyValues to_key_values(const RunConfig& cfg);

/// Reads the observation declared by cfg.kind.
CyclicObservation load_input(const RunConfig& cfg);

struct RunOutcome {
    ReconstructionResult result;
    CyclicField data_term;
    CyclicField smoothness;
};

/// Builds D and S, runs the chosen solver, writes every configured output.
RunOutcome run(const RunConfig& cfg);

/// Process exit codes of the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitNotConverged = 2;

/// Synthetic test data.
struct SynthParams {
    std::vector<long long> dims{64, 64};
    std::string pattern = "two-phase"; ///< two-phase | ramp | disk
    double noise = 0.6;                ///< std dev of wrapped Gaussian angle noise, radians
    std::uint64_t seed = 1;
    double phase_a = 2.6;
    double phase_b = -2.0;
    double cycles = 1.0; ///< ramp: number of full turns across the last axis
    int n_theta = 32;    ///< only recorded in field headers

    void validate() const;
};

struct SynthData {
    SpatialField truth;      ///< ground-truth angles
    SpatialField observed;   ///< noisy angles
    SpatialField real_part;  ///< cos(observed)
    SpatialField imag_part;  ///< sin(observed)
};

/// two-phase: phase_a where the first-axis index is below half, else phase_b.
/// disk: phase_b inside a centred disk of radius min(dim)/3, else phase_a.
/// ramp: phase_a + 2 pi cycles x / n along the last axis, wrapped.
SynthData synthesize(const SynthParams& params);

/// Writes prefix_truth.cmf, prefix_real.cmf, prefix_imag.cmf (spatial field
/// files) and prefix_meta.txt with the generator parameters including the seed.
void write_synth(const SynthData& data, const SynthParams& params, const std::string& prefix);

/// Applies CMF_NUM_THREADS if set; returns the thread count in effect.
int configure_threads_from_env();

} // namespace cmf
