// cmf: cyclic continuous max-flow reconstruction driver.
//
//   cmf reconstruct --config run.txt [--flag value ...]
//   cmf synth --prefix out/syn --dims 64,64 --pattern two-phase --noise 0.6 --seed 1
//   cmf energy --u u.cmf --data d.cmf --smoothness 0.3
//   cmf trace-plot-data --trace run_trace.csv [--output plot.csv]
//
// Exit status: 0 ok, 2 solver did not converge (outputs still written), 1 usage or I/O error.
// CMF_NUM_THREADS sets the OpenMP thread count.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cmf/data_term.hpp"
#include "cmf/field_io.hpp"
#include "cmf/run.hpp"

namespace {

using namespace cmf;

// reconstruct flags; each maps 1:1 onto a config key
const char* const kRunKeys[] = {
    "input",       "input-imag",   "kind",          "n-theta",   "solver",     "c",
    "tau",         "max-iters",    "tolerance",     "log-every", "anneal-factor",
    "anneal-floor", "pf-flow-weight", "power",      "scale",     "smoothness", "smoothness-map",
    "out-labels",  "out-u",        "out-trace",     "out-preview", "out-data", "out-config",
    "prefix"};

std::string read_text(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

int cmd_reconstruct(const std::string& config_path, const std::map<std::string, std::string>& overrides, bool quiet) {
    KeyValues kv;
    if (!config_path.empty()) kv = parse_key_values(read_text(config_path));
    for (const auto& [k, v] : overrides) kv[k] = v;
    const RunConfig cfg = run_config_from(kv);
    const RunOutcome out = run(cfg);
    const auto& r = out.result;
    if (!quiet) {
        const auto e = energy_clipped(r.final_u, out.data_term, out.smoothness);
        std::cerr << "solver=" << to_string(r.solver) << " iterations=" << r.iterations
                  << " converged=" << (r.converged ? "yes" : "no") << " energy=" << num(e.total) << "\n";
    }
    if (!r.converged) {
        std::cerr << "warning: " << to_string(r.solver) << " did not converge in " << r.iterations
                  << " iterations\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

int cmd_energy(const std::string& u_path, const std::string& d_path, double s_value, const std::string& s_path,
               bool clip) {
    const CyclicField u = load_cyclic(u_path);
    const CyclicField D = load_cyclic(d_path);
    CyclicField S;
    if (s_path.empty()) {
        S = constant_field(u.grid(), s_value);
    } else {
        const auto h = decode_header(read_file_bytes(s_path));
        S = h.kind == FieldKind::spatial ? broadcast_theta(SpatialField(u.grid(), [&] {
                const auto s = load_spatial(s_path);
                if (s.grid().spatial_dims() != u.grid().spatial_dims())
                    throw std::invalid_argument("smoothness map shape does not match u");
                return std::vector<double>(s.values().begin(), s.values().end());
            }()))
                                         : load_cyclic(s_path);
    }
    const EnergyReport e = clip ? energy_clipped(u, D, S) : energy(u, D, S);
    std::cout << "data_energy," << num(e.data_energy) << "\n"
              << "smoothness_energy," << num(e.smoothness_energy) << "\n"
              << "total," << num(e.total) << "\n";
    return kExitOk;
}

// Plot-ready view of a trace: energies relative to the last record, log10 of
// the decaying metrics (empty cell when the value is 0).
void write_plot_data(std::ostream& out, const ConvergenceTrace& t) {
    if (t.records.empty()) throw std::runtime_error("trace has no records");
    const double final_e = t.records.back().energy;
    const double denom = std::max(std::fabs(final_e), 1e-300);
    auto lg = [](double v) { return v > 0.0 ? num(std::log10(v)) : std::string(); };
    if (t.kind == SolverKind::al) {
        out << "iteration,energy,rel_energy_gap,log10_mean_G,log10_max_G,log10_norm_err\n";
        for (const auto& r : t.records)
            out << r.iteration << "," << num(r.energy) << "," << num((r.energy - final_e) / denom) << ","
                << lg(r.mean_G) << "," << lg(r.max_G) << "," << lg(r.norm_err) << "\n";
    } else {
        out << "iteration,energy,pf_objective,duality_gap,rel_energy_gap,log10_max_du,log10_norm_err\n";
        for (const auto& r : t.records)
            out << r.iteration << "," << num(r.energy) << "," << num(r.pf_objective) << ","
                << num(r.energy - r.pf_objective) << "," << num((r.energy - final_e) / denom) << ","
                << lg(r.max_du) << "," << lg(r.norm_err) << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cyclic continuous max-flow reconstruction"};
    app.require_subcommand(1);

    auto* rec = app.add_subcommand("reconstruct", "Reconstruct a cyclic label map");
    std::string config_path;
    bool quiet = false;
    rec->add_option("--config", config_path, "key = value config file; flags override it");
    rec->add_flag("-q,--quiet", quiet, "No summary on stderr");
    std::map<std::string, std::string> run_flags;
    std::map<std::string, CLI::Option*> run_opts;
    for (const char* key : kRunKeys) {
        run_opts[key] = rec->add_option(std::string("--") + key, run_flags[key]);
    }
    run_opts["input"]->description("Input file (real part for complex-pair)");
    run_opts["kind"]->description("complex-pair | rgb | raw-field");
    run_opts["solver"]->description("al | pf");
    run_opts["prefix"]->description("Fill unset outputs as PREFIX_labels.cmf, _u.cmf, _trace.csv, _preview.pgm, _config.txt");

    auto* syn = app.add_subcommand("synth", "Write a synthetic noisy cyclic field");
    SynthParams sp;
    std::string syn_prefix;
    syn->add_option("--prefix", syn_prefix, "Output prefix")->required();
    syn->add_option("--dims", sp.dims, "Spatial dims, comma separated")->delimiter(',');
    syn->add_option("--pattern", sp.pattern, "two-phase | ramp | disk");
    syn->add_option("--noise", sp.noise, "Wrapped Gaussian sigma, radians");
    syn->add_option("--seed", sp.seed);
    syn->add_option("--phase-a", sp.phase_a);
    syn->add_option("--phase-b", sp.phase_b);
    syn->add_option("--cycles", sp.cycles, "Ramp turns across the last axis");
    syn->add_option("--n-theta", sp.n_theta, "Bin count recorded in the field headers");

    auto* en = app.add_subcommand("energy", "Evaluate the relaxed energy of u");
    std::string e_u, e_d, e_s;
    double e_sv = 0.0;
    bool e_clip = false;
    en->add_option("--u", e_u, "Cyclic field u")->required();
    en->add_option("--data", e_d, "Cyclic field D")->required();
    auto* sv = en->add_option("--smoothness", e_sv, "Constant S");
    en->add_option("--smoothness-map", e_s, "Spatial or cyclic field S")->excludes(sv);
    en->add_flag("--clip", e_clip, "Clip u to >= 0 first");

    auto* tp = app.add_subcommand("trace-plot-data", "Convert a solver trace to plot-ready CSV");
    std::string t_in, t_out;
    tp->add_option("--trace", t_in, "Trace CSV written by reconstruct")->required();
    tp->add_option("--output", t_out, "Output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitFailure;
    }

    try {
        configure_threads_from_env();
        if (*rec) {
            std::map<std::string, std::string> overrides;
            for (const auto& [key, opt] : run_opts)
                if (opt->count() > 0) overrides[key] = run_flags[key];
            return cmd_reconstruct(config_path, overrides, quiet);
        }
        if (*syn) {
            write_synth(synthesize(sp), sp, syn_prefix);
            return kExitOk;
        }
        if (*en) return cmd_energy(e_u, e_d, e_sv, e_s, e_clip);
        if (*tp) {
            std::ifstream in(t_in);
            if (!in) throw std::runtime_error("cannot read " + t_in);
            const ConvergenceTrace t = read_trace_csv(in);
            if (t_out.empty()) {
                write_plot_data(std::cout, t);
            } else {
                std::ofstream out(t_out, std::ios::trunc);
                if (!out) throw std::runtime_error("cannot write " + t_out);
                write_plot_data(out, t);
            }
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
