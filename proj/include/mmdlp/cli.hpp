#pragma once

#include "mmdlp/jobplan.hpp"
#include "mmdlp/machine_sim.hpp"
#include "mmdlp/platability.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mmdlp::cli {

// Everything a run depends on besides the manifest and meshes. Written to
// <out>/config.json so a run can be repeated with --config.
struct RunConfig {
    std::string manifest;
    std::string out = "out";
    std::optional<double> layer_height_mm; // overrides the manifest
    std::uint32_t grid_width_px = 2560;
    std::uint32_t grid_height_px = 1620;
    double pitch_um = 47.25;
    std::optional<double> voxel_mm; // default: layer height
    std::uint64_t overlap_threshold_px = 0;
    std::int64_t default_exposure_ms = 8000;
    ProcessParams process = default_process();
    bool write_labels = false;
    bool write_layer_dump = true;

    static ProcessParams default_process();
};

std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(std::string_view text);

// Grid of the configured size centered on the build volume.
GridSpec grid_for(const Assembly& assembly, const RunConfig& config);

struct SliceArtifacts {
    LayerStack stack;
    std::vector<LayerMasks> masks; // per layer, only nonempty materials
    GridSpec grid;
    std::uint64_t clipped_pixels = 0;
};

// Loads the manifest, applies the layer height override and fills missing
// per-material exposures with default_exposure_ms.
Assembly load_for_run(RunConfig& config);

SliceArtifacts slice_stage(const Assembly& assembly, const RunConfig& config);
// masks/*.pbm plus layers.txt (z, class and mask files per layer).
void write_slice_artifacts(const SliceArtifacts& slices, const std::filesystem::path& out, const PoolTable& pools,
                           const ProcessParams& params);

struct PlanArtifacts {
    JobProgram program;
    OverlapReport overlap;
    double estimated_s = 0;
};

PlanArtifacts plan_stage(const Assembly& assembly, const SliceArtifacts& slices, const RunConfig& config);
std::string plan_summary(const PlanArtifacts& plan, const SliceArtifacts& slices, const ProcessParams& params);

struct PlatabilityArtifacts {
    VoxelGrid grid;
    PlatingReport report;
};

PlatabilityArtifacts platability_stage(const Assembly& assembly, const RunConfig& config);

// Demo assemblies (STL + manifest.json per subdirectory). Returns the
// manifest paths.
std::vector<std::filesystem::path> write_demo(const std::filesystem::path& dir);

// Exit codes: 0 ok, 1 internal error, 2 invalid input, 3 simulation violation.
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_main(int argc, char** argv);

} // namespace mmdlp::cli
