#pragma once

#include <filesystem>
#include <string>

#include "motifcast/pipeline.hpp"

namespace motifcast::cli {

// One experiment configuration: pipeline settings plus optional input paths.
// Command-line flags override file values; unknown keys are rejected.
struct RunConfig {
    pipeline::PipelineConfig pipeline;
    std::string graph_path;
    std::string matrix_path;
    std::string records_path;
    std::string output_dir;

    static RunConfig defaults() { return RunConfig{}; }
    static RunConfig from_file(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

}  // namespace motifcast::cli
