#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "editreg/correspond.hpp"
#include "editreg/filter.hpp"
#include "editreg/grasp.hpp"
#include "editreg/lift.hpp"
#include "editreg/register.hpp"
#include "editreg/scene.hpp"

namespace editreg {

enum class EditDepthMode { Reference, Native };

// Everything run_pipeline can be told. Serialized into every report.
struct PipelineConfig {
    bool filter_enabled = true;
    FilterConfig filter;
    MatchConfig match;
    bool unify_scale = true;
    double scale_gap_warning = 0.5;
    double grasp_margin = kDefaultGraspMargin;
    int crop_margin = kDefaultCropMargin;
    // Reference: the edited archive's depth.bin is resampled through the crop
    // (mock estimator). Native: depth_native.bin holds estimator output.
    EditDepthMode edit_depth = EditDepthMode::Reference;
    int native_width = kDefaultNativeResolution;
    int native_height = kDefaultNativeResolution;
    std::optional<std::string> dump_dir;

    // Throws InvalidArgument for out-of-range values.
    void validate() const;
};

// Command-line values; set fields win over the config file.
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> k_layers;
    std::optional<double> eps;
    std::optional<int> min_pts;
    std::optional<int> s_min;
    std::optional<double> d_thr;
    std::optional<double> margin;
    bool no_filter = false;
    bool no_scale_align = false;
    std::optional<std::string> dump_dir;
};

// Applies a JSON config on top of `base`. Unknown keys and wrong types throw
// InvalidArgument naming the key.
PipelineConfig parse_config(std::string_view json_text, PipelineConfig base = {});
std::string config_to_json(const PipelineConfig& cfg);

// default < config file < overrides.
PipelineConfig resolve_config(const std::optional<std::filesystem::path>& config_path,
                              const ConfigOverrides& overrides);

struct StageTiming {
    std::string stage;
    double ms = 0.0;
};

struct PipelineCounts {
    std::size_t obs_lifted = 0, edit_lifted = 0;
    std::size_t obs_active = 0, obs_passive = 0, edit_active = 0, edit_passive = 0;
    std::size_t obs_filtered = 0, edit_filtered = 0;
    std::size_t passive_pairs = 0, active_pairs = 0;
    std::size_t grasps_in = 0, grasps_kept = 0;
};

struct GraspSummary {
    std::vector<std::size_t> kept;  // indices into the observed candidates
    std::size_t hull_vertices = 0;
    std::size_t hull_faces = 0;
};

struct PipelineReport {
    PipelineConfig config;
    std::string instruction;
    PipelineCounts counts;
    std::optional<ObjectFilterResult> obs_filter, edit_filter;  // kept clouds dropped
    RegistrationResult registration;
    std::optional<GraspSummary> grasps;
    std::vector<std::string> warnings;
    std::vector<StageTiming> timing;
};

// Intermediate clouds, for plotting and inspection.
struct PipelineArtifacts {
    FeatureCloud obs_lifted, edit_lifted;
    FeatureCloud obs_filtered, edit_filtered;
    CorrespondenceSet passive_set, active_set;
};

// Stages: lift, filter, correspond, register, grasp. A failing stage
// rethrows its Error with stage() set. `edit_source` replaces the
// config-selected depth source when given.
PipelineReport run_pipeline(const SceneBundle& obs, const SceneBundle& edit, const PipelineConfig& cfg,
                            DepthSource* edit_source = nullptr, PipelineArtifacts* artifacts = nullptr);

// Loads both archives (stage "load") and the config, then runs.
PipelineReport run_pipeline(const std::filesystem::path& obs_dir, const std::filesystem::path& edit_dir,
                            const PipelineConfig& cfg, PipelineArtifacts* artifacts = nullptr);
PipelineReport run_pipeline(const std::filesystem::path& obs_dir, const std::filesystem::path& edit_dir,
                            const std::optional<std::filesystem::path>& config_path);

// {"format", "format_version", "deterministic": {...}, "timing": {...}}.
// Everything except "timing" depends only on the inputs and config.
std::string report_to_json(const PipelineReport& report);

}  // namespace editreg
