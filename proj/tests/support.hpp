#pragma once

#include <filesystem>
#include <string>

#include "wbrt/phantom.hpp"
#include "wbrt/projection.hpp"

namespace wbrt::test {

// Default phantom, generated once per test binary.
const Phantom& default_phantom();
const BevFrame& default_bev_frame();
// Approach-1 silhouettes of the default phantom (parallel beam).
const SilhouetteSet& default_silhouettes();

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

// Runs the CLI with the given argument string; returns its exit status. stderr goes to err_file if given.
int run_cli(const std::string& args, const std::string& err_file = "");

}  // namespace wbrt::test
