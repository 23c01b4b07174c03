#pragma once

// Runs the editreg tool as a subprocess; shared by the CLI suite and the
// acceptance binary.

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "editreg/formats.hpp"

namespace editreg::testing {

#ifndef EDITREG_CLI_PATH
#define EDITREG_CLI_PATH "editreg"
#endif

struct CliStep {
    std::string name;
    std::string args;  // without --report
};

inline int run_cli(const std::string& args, const std::filesystem::path& report, const std::filesystem::path& log) {
    const std::string cmd = std::string("\"") + EDITREG_CLI_PATH + "\" " + args + " --report \"" + report.string() +
                            "\" 2> \"" + log.string() + "\"";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

inline int run_cli_plain(const std::string& args, const std::filesystem::path& log) {
    const std::string cmd = std::string("\"") + EDITREG_CLI_PATH + "\" " + args + " > /dev/null 2> \"" +
                            log.string() + "\"";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// Every subcommand, chained on one synthetic scene written under `dir`.
inline std::vector<CliStep> cli_chain(const std::filesystem::path& dir, const std::string& task, int seed) {
    const std::string d = "\"" + dir.string() + "\"";
    const std::string s = std::to_string(seed);
    return {
        {"synth", "synth --task " + task + " --seed " + s +
                      " --depth-sigma 0.002 --flying-edge 0.05 --feature-noise 0.05 --grasps 24 --out " + d + "/scene"},
        {"lift-obs", "lift --scene " + d + "/scene/obs --state obs --out " + d + "/obs.bin"},
        {"lift-edit", "lift --scene " + d + "/scene/edit --state edit --out " + d + "/edit.bin"},
        {"filter-obs", "filter --cloud " + d + "/obs.bin --seed " + s + " --out " + d + "/obs_f.bin"},
        {"filter-edit", "filter --cloud " + d + "/edit.bin --seed " + s + " --out " + d + "/edit_f.bin"},
        {"filter-spatial", "filter --mode spatial --cloud " + d + "/obs.bin --out " + d + "/obs_s.bin"},
        {"correspond", "correspond --obs " + d + "/obs_f.bin --edit " + d + "/edit_f.bin --out " + d + "/pairs.json"},
        {"register", "register --obs " + d + "/obs_f.bin --edit " + d + "/edit_f.bin --pairs " + d +
                         "/pairs.json --scene " + d + "/scene/obs --out " + d + "/reg.json"},
        {"grasp-filter", "grasp-filter --scene " + d + "/scene/obs --transform " + d + "/reg.json --out " + d +
                             "/grasps.json"},
        {"pipeline", "pipeline --obs " + d + "/scene/obs --edit " + d + "/scene/edit --seed " + s + " --dump " + d +
                         "/dump"},
        {"plot", "plot --obs " + d + "/scene/obs --edit " + d + "/scene/edit --seed " + s + " --out " + d + "/plot"},
    };
}

inline nlohmann::json deterministic_section(const std::filesystem::path& report) {
    return nlohmann::json::parse(formats::read_text(report)).at("deterministic");
}

}  // namespace editreg::testing
