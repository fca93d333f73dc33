#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>

#include "support.hpp"

namespace wbrt::test {

std::filesystem::path scratch_root()
{
    return std::filesystem::temp_directory_path() / ("wbrt_test_" + std::to_string(::getpid()));
}

const Phantom& default_phantom()
{
    static const Phantom ph = [] {
        const PhantomSpec spec;
        return generate(spec, fit_grid(spec));
    }();
    return ph;
}

const BevFrame& default_bev_frame()
{
    static const BevFrame f = default_frame(*default_phantom().cohort.find("skin"));
    return f;
}

const SilhouetteSet& default_silhouettes()
{
    static const SilhouetteSet s = project_all(default_phantom().cohort, BeamGeometry{}, default_bev_frame());
    return s;
}

std::filesystem::path scratch_dir(const std::string& name)
{
    const auto p = scratch_root() / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

int run_cli(const std::string& args, const std::string& err_file)
{
    std::string cmd = std::string(WBRT_CLI_PATH) + " " + args + " >/dev/null";
    cmd += err_file.empty() ? " 2>/dev/null" : " 2>" + err_file;
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace wbrt::test

int main(int argc, char** argv)
{
    doctest::Context ctx(argc, argv);
    const int rc = ctx.run();
    std::error_code ec;
    std::filesystem::remove_all(wbrt::test::scratch_root(), ec);
    return rc;
}
