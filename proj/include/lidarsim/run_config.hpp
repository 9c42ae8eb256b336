#pragma once

#include "lidarsim/gbuffer_io.hpp"
#include "lidarsim/geometry.hpp"
#include "lidarsim/pipeline.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lidarsim
{

struct GridPatternSpec
{
    double h_fov_deg = 0.0;
    double v_fov_deg = 0.0;
    int nh = 1;
    int nv = 1;
};

/**
 * Run configuration shared by all subcommands. Same YAML dialect as scene files;
 * relative paths are resolved against the directory of the config file. Every
 * field can be overridden from the command line.
 */
struct RunConfig
{
    std::optional<std::filesystem::path> scene;
    std::vector<std::filesystem::path> gbuffers;
    std::optional<std::filesystem::path> kernel;
    std::optional<std::filesystem::path> emitter;
    std::optional<std::filesystem::path> collector;
    std::optional<std::filesystem::path> pattern;
    std::optional<GridPatternSpec> pattern_grid;
    std::optional<std::filesystem::path> pulse;
    double pulse_sigma_r = 0.0;

    std::optional<PinholeProjection> projection;
    std::optional<ClipPlanes> clip;

    SimConfig sim;
    DetectionConfig detection;
    Algorithm algorithm = Algorithm::beam_iteration;
    std::optional<EchoPolicy> echo_policy;
    SliceSkip slice_skip = SliceSkip::empty;
    double separable_tolerance = 1e-9;
    int threads = 0;

    std::optional<std::filesystem::path> out_gbuffer;
    std::optional<std::filesystem::path> out_csv;
    std::optional<std::filesystem::path> out_ply;

    /// Consistency checks that need no file access.
    void validate() const;
    /// Throws ParseError naming the first referenced input file that does not exist.
    void check_inputs_exist() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text, const std::string& source = "<string>",
                           const std::filesystem::path& base_dir = {});

struct LoadedInputs
{
    SimulationInputs inputs;
    double ingest_s = 0.0;
};

/// Reads every referenced file and assembles the simulation inputs.
LoadedInputs load_inputs(const RunConfig& cfg);

} // namespace lidarsim
