#include "vp2d/simulation.hpp"

#include "vp2d/errors.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace vp2d {
namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmtg(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::ofstream open_out(const std::string& path, bool append = false) {
    std::ofstream f(path, append ? std::ios::app : std::ios::trunc);
    if (!f) throw IoError("cannot write file: " + path);
    return f;
}

}  // namespace

OutputWriter::OutputWriter(std::string outdir) : dir_(std::move(outdir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_ + ": " + ec.message());
}

void OutputWriter::write_manifest(const RunConfig& cfg, const std::vector<std::string>& extra) {
    auto f = open_out(dir_ + "/manifest.txt");
    f << "# vp2d " << VP2D_VERSION << " run manifest: resolved configuration\n";
    f << config_to_text(cfg);
    f << "# derived\n";
    for (const std::string& s : extra) f << "# " << s << "\n";
    if (!f.good()) throw IoError("write failed: " + dir_ + "/manifest.txt");
}

void OutputWriter::append_log(const std::string& line) {
    auto f = open_out(dir_ + "/run.log", true);
    f << line << "\n";
}

void OutputWriter::write_timeseries(const TimeSeries& ts) const {
    auto f = open_out(dir_ + "/timeseries.csv");
    f << "t,ex_l2,ex_linf,ey_l2,total_q,rms_x,rms_vx,minf\n";
    for (const TimeSample& s : ts.rows)
        f << fmt17(s.t) << ',' << fmt17(s.ex_l2) << ',' << fmt17(s.ex_linf) << ','
          << fmt17(s.ey_l2) << ',' << fmt17(s.total_q) << ',' << fmt17(s.rms_x) << ','
          << fmt17(s.rms_vx) << ',' << fmt17(s.min_f) << "\n";
    if (!f.good()) throw IoError("write failed: " + dir_ + "/timeseries.csv");
}

void OutputWriter::write_projection(const Projection& p, double t) const {
    std::string path = dir_ + "/proj_xvx_" + fmtg(t) + ".csv";
    auto f = open_out(path);
    f << "x,vx,F\n";
    for (int j = 0; j < p.spec.nvx; ++j)
        for (int i = 0; i < p.spec.nx; ++i)
            f << fmt17(p.spec.x0 + i * p.spec.dx) << ',' << fmt17(p.spec.v0 + j * p.spec.dv)
              << ',' << fmt17(p.F[std::size_t(j) * p.spec.nx + i]) << "\n";
    if (!f.good()) throw IoError("write failed: " + path);
}

void OutputWriter::write_plot_script() const {
    auto f = open_out(dir_ + "/plot.gp");
    f << "# gnuplot script: field amplitude decay and RMS history\n"
         "set datafile separator ','\n"
         "set terminal pngcairo size 900,600\n"
         "set output 'amplitude.png'\n"
         "set logscale y\n"
         "set xlabel 't'\n"
         "set ylabel '|E_x| (L2)'\n"
         "plot 'timeseries.csv' using 1:2 every ::1 with lines title 'Ex L2', \\\n"
         "     'timeseries.csv' using 1:3 every ::1 with lines title 'Ex Linf'\n"
         "unset logscale y\n"
         "set output 'rms.png'\n"
         "set ylabel 'RMS'\n"
         "plot 'timeseries.csv' using 1:6 every ::1 with lines title 'rms x', \\\n"
         "     'timeseries.csv' using 1:7 every ::1 with lines title 'rms vx'\n";
}

void OutputWriter::write_report(const RunConfig&, const RunResult& r) const {
    auto f = open_out(dir_ + "/report.txt");
    f << "steps = " << r.steps << "\n";
    f << "wall_seconds = " << fmt17(r.wall_seconds) << "\n";
    f << "particles_initial = " << r.particles_initial << "\n";
    f << "particles_final = " << r.particles_final << "\n";
    f << "q_initial = " << fmt17(r.q_initial) << "\n";
    f << "remap_count = " << r.remaps.size() << "\n";
    f << "max_remap_residual_rel = " << fmt17(r.max_remap_residual_rel) << "\n";
    f << "flagged_total = " << r.flagged_total << "\n";
    double dropped = 0, lost = 0;
    for (const RemapReport& rep : r.remaps) {
        dropped += rep.dropped;
        lost += rep.lost;
    }
    f << "dropped_total = " << fmt17(dropped) << "\n";
    f << "lost_total = " << fmt17(lost) << "\n";
    f << "momentum_x_initial = " << fmt17(r.momentum_initial[0]) << "\n";
    f << "momentum_y_initial = " << fmt17(r.momentum_initial[1]) << "\n";
    f << "momentum_x_final = " << fmt17(r.momentum_final[0]) << "\n";
    f << "momentum_y_final = " << fmt17(r.momentum_final[1]) << "\n";
}

std::string OutputWriter::dump_particles(const ParticleSet& p, int step) const {
    std::string path = dir_ + "/failure_state_step" + std::to_string(step) + ".csv";
    auto f = open_out(path);
    f << "x,y,vx,vy,q\n";
    for (std::size_t i = 0; i < p.size(); ++i)
        f << fmt17(p.x[i]) << ',' << fmt17(p.y[i]) << ',' << fmt17(p.vx[i]) << ','
          << fmt17(p.vy[i]) << ',' << fmt17(p.q[i]) << "\n";
    return path;
}

void OutputWriter::write_convergence(const std::vector<std::array<double, 6>>& rows) const {
    auto f = open_out(dir_ + "/convergence.csv");
    f << "t,ex_eh,ey_eh,ex_e2h,ey_e2h,q\n";
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) f << (c ? "," : "") << fmt17(r[c]);
        f << "\n";
    }
    if (!f.good()) throw IoError("write failed: " + dir_ + "/convergence.csv");
}

TimeSeries parse_timeseries(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    TimeSeries ts;
    std::string line;
    if (!std::getline(f, line)) throw IoError("empty timeseries: " + path);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        TimeSample s;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream in(line);
        if (!(in >> s.t >> s.ex_l2 >> s.ex_linf >> s.ey_l2 >> s.total_q >> s.rms_x >> s.rms_vx >>
              s.min_f))
            throw IoError("malformed timeseries row in " + path);
        ts.rows.push_back(s);
    }
    return ts;
}

}  // namespace vp2d
