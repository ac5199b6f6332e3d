#include "cmf/solver_common.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cmf {

std::string to_string(SolverKind kind) { return kind == SolverKind::al ? "al" : "pf"; }

SolverKind parse_solver_kind(const std::string& name) {
    if (name == "al") return SolverKind::al;
    if (name == "pf") return SolverKind::pf;
    throw std::invalid_argument("unknown solver '" + name + "' (expected al or pf)");
}

SolverConfig SolverConfig::al_defaults() {
    SolverConfig cfg;
    cfg.c = 0.25;
    cfg.tau = 0.1;
    cfg.max_iters = 5000;
    cfg.tolerance = 1e-3;
    return cfg;
}

SolverConfig SolverConfig::pf_defaults() {
    SolverConfig cfg;
    cfg.c = 0.1;
    cfg.tau = 0.1;
    cfg.max_iters = 5000;
    cfg.tolerance = 1e-6;
    return cfg;
}

SolverConfig SolverConfig::defaults_for(SolverKind kind) {
    return kind == SolverKind::al ? al_defaults() : pf_defaults();
}

void SolverConfig::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("c must be > 0");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be > 0");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (!(tolerance >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
    if (log_every < 1) throw std::invalid_argument("log_every must be >= 1");
    if (!(anneal_factor > 0.0 && anneal_factor <= 1.0))
        throw std::invalid_argument("anneal_factor must be in (0, 1]");
    if (!(anneal_floor >= 0.0)) throw std::invalid_argument("anneal_floor must be >= 0");
    if (anneal_factor < 1.0 && !(anneal_floor > 0.0))
        throw std::invalid_argument("anneal_floor must be > 0 when annealing (anneal_factor < 1)");
}

namespace {

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("trace line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

} // namespace

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace) {
    const bool al = trace.kind == SolverKind::al;
    out << (al ? "iteration,energy,mean_G,max_G,norm_err\n"
               : "iteration,energy,pf_objective,max_du,norm_err\n");
    for (const auto& r : trace.records) {
        out << r.iteration << ',' << fmt(r.energy) << ',' << fmt(al ? r.mean_G : r.pf_objective) << ','
            << fmt(al ? r.max_G : r.max_du) << ',' << fmt(r.norm_err) << '\n';
    }
}

ConvergenceTrace read_trace_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty trace file");
    ConvergenceTrace trace;
    if (header == "iteration,energy,mean_G,max_G,norm_err")
        trace.kind = SolverKind::al;
    else if (header == "iteration,energy,pf_objective,max_du,norm_err")
        trace.kind = SolverKind::pf;
    else
        throw std::runtime_error("unrecognised trace header '" + header + "'");

    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (cols.size() != 5)
            throw std::runtime_error("trace line " + std::to_string(lineno) + ": expected 5 columns");
        TraceRecord r;
        r.iteration = static_cast<int>(parse_double(cols[0], lineno));
        r.energy = parse_double(cols[1], lineno);
        const double a = parse_double(cols[2], lineno);
        const double b = parse_double(cols[3], lineno);
        if (trace.kind == SolverKind::al) {
            r.mean_G = a;
            r.max_G = b;
        } else {
            r.pf_objective = a;
            r.max_du = b;
        }
        r.norm_err = parse_double(cols[4], lineno);
        trace.records.push_back(r);
    }
    return trace;
}

double normalization_error(const CyclicField& u) {
    const auto integral = integrate_theta(u);
    double worst = 0.0;
    for (double x : integral.values()) worst = std::max(worst, std::fabs(x - 1.0));
    return worst;
}

} // namespace cmf
