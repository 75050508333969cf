#include "aschwarz/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace aschwarz {

namespace {

// Shortest round-trip formatting for doubles so that equal values always
// produce equal bytes.
std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string report_to_json(const RunReport& rep) {
    nlohmann::ordered_json j;
    j["engine"] = rep.engine;
    j["iterations"] = rep.iterations;
    j["coarse_solves"] = rep.coarse_solves;
    j["identical_corrections_avg"] = rep.identical_corrections_avg;
    j["final_residual"] = rep.final_residual;
    j["converged"] = rep.converged;
    j["diverged"] = rep.diverged;
    j["sim_time"] = rep.sim_time;
    j["residual_history"] = rep.residual_history;
    return j.dump(2) + "\n";
}

std::string residuals_to_csv(const RunReport& rep) {
    std::string out = "# residuals csv v1\nk,residual\n";
    for (std::size_t k = 0; k < rep.residual_history.size(); ++k) {
        out += std::to_string(k);
        out += ',';
        out += fmt_double(rep.residual_history[k]);
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace aschwarz
