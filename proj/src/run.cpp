#include "cmf/run.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "cmf/field_io.hpp"
#include "cmf/image_io.hpp"
#include "cmf/solver_al.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cmf {

std::string to_string(InputKind kind) {
    switch (kind) {
    case InputKind::complex_pair: return "complex-pair";
    case InputKind::rgb: return "rgb";
    case InputKind::raw_field: return "raw-field";
    }
    return "?";
}

InputKind parse_input_kind(const std::string& name) {
    if (name == "complex-pair") return InputKind::complex_pair;
    if (name == "rgb") return InputKind::rgb;
    if (name == "raw-field") return InputKind::raw_field;
    throw std::invalid_argument("unknown input kind '" + name + "' (expected complex-pair, rgb or raw-field)");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("config key '" + key + "': expected a number, got '" + s + "'");
    return v;
}

int to_int(const std::string& key, const std::string& s) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + s + "'");
    return v;
}

std::string to_string(PFFlowWeight w) { return w == PFFlowWeight::normalized ? "normalized" : "unnormalized"; }

PFFlowWeight parse_flow_weight(const std::string& s) {
    if (s == "normalized") return PFFlowWeight::normalized;
    if (s == "unnormalized") return PFFlowWeight::unnormalized;
    throw std::invalid_argument("pf-flow-weight must be normalized or unnormalized, got '" + s + "'");
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "input",       "input-imag",   "kind",          "n-theta",   "solver",     "c",
        "tau",         "max-iters",    "tolerance",     "log-every", "anneal-factor",
        "anneal-floor", "pf-flow-weight", "power",      "scale",     "smoothness", "smoothness-map",
        "out-labels",  "out-u",        "out-trace",     "out-preview", "out-data", "out-config",
        "prefix"};
    return keys;
}

} // namespace

void RunConfig::validate() const {
    if (input.empty()) throw std::invalid_argument("input path is required");
    if (kind == InputKind::complex_pair && input_imag.empty())
        throw std::invalid_argument("complex-pair input needs input-imag");
    if (n_theta < 2) throw std::invalid_argument("n-theta must be >= 2");
    if (power != 1 && power != 2) throw std::invalid_argument("power must be 1 or 2");
    if (!(scale > 0.0)) throw std::invalid_argument("scale must be > 0");
    if (!(smoothness >= 0.0) || !std::isfinite(smoothness))
        throw std::invalid_argument("smoothness must be finite and >= 0");
    if (out_labels.empty()) throw std::invalid_argument("out-labels path is required");
    solver_config.validate();

    std::vector<std::string> paths;
    for (const auto* p : {&input, &input_imag, &smoothness_map, &out_labels, &out_u, &out_trace, &out_preview,
                          &out_data, &out_config})
        if (!p->empty()) paths.push_back(std::filesystem::path(*p).lexically_normal().string());
    std::sort(paths.begin(), paths.end());
    if (std::adjacent_find(paths.begin(), paths.end()) != paths.end())
        throw std::invalid_argument("input and output paths must all be distinct");
}

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[')
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": sections are not supported");
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

std::string format_key_values(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

RunConfig run_config_from(const KeyValues& kv) {
    for (const auto& [k, v] : kv)
        if (!known_keys().count(k)) throw std::invalid_argument("unknown config key '" + k + "'");
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };

    RunConfig cfg;
    if (auto v = get("solver")) cfg.solver = parse_solver_kind(*v);
    cfg.solver_config = SolverConfig::defaults_for(cfg.solver);
    if (auto v = get("input")) cfg.input = *v;
    if (auto v = get("input-imag")) cfg.input_imag = *v;
    if (auto v = get("kind")) cfg.kind = parse_input_kind(*v);
    if (auto v = get("n-theta")) cfg.n_theta = to_int("n-theta", *v);
    if (auto v = get("c")) cfg.solver_config.c = to_double("c", *v);
    if (auto v = get("tau")) cfg.solver_config.tau = to_double("tau", *v);
    if (auto v = get("max-iters")) cfg.solver_config.max_iters = to_int("max-iters", *v);
    if (auto v = get("tolerance")) cfg.solver_config.tolerance = to_double("tolerance", *v);
    if (auto v = get("log-every")) cfg.solver_config.log_every = to_int("log-every", *v);
    if (auto v = get("anneal-factor")) cfg.solver_config.anneal_factor = to_double("anneal-factor", *v);
    if (auto v = get("anneal-floor")) cfg.solver_config.anneal_floor = to_double("anneal-floor", *v);
    if (auto v = get("pf-flow-weight")) cfg.pf_flow_weight = parse_flow_weight(*v);
    if (auto v = get("power")) cfg.power = to_int("power", *v);
    if (auto v = get("scale")) cfg.scale = to_double("scale", *v);
    if (auto v = get("smoothness")) cfg.smoothness = to_double("smoothness", *v);
    if (auto v = get("smoothness-map")) cfg.smoothness_map = *v;
    if (auto v = get("out-labels")) cfg.out_labels = *v;
    if (auto v = get("out-u")) cfg.out_u = *v;
    if (auto v = get("out-trace")) cfg.out_trace = *v;
    if (auto v = get("out-preview")) cfg.out_preview = *v;
    if (auto v = get("out-data")) cfg.out_data = *v;
    if (auto v = get("out-config")) cfg.out_config = *v;
    if (auto v = get("prefix"); v && !v->empty()) {
        const std::string& p = *v;
        if (cfg.out_labels.empty()) cfg.out_labels = p + "_labels.cmf";
        if (cfg.out_u.empty()) cfg.out_u = p + "_u.cmf";
        if (cfg.out_trace.empty()) cfg.out_trace = p + "_trace.csv";
        if (cfg.out_preview.empty()) cfg.out_preview = p + "_preview.pgm";
        if (cfg.out_config.empty()) cfg.out_config = p + "_config.txt";
    }
    return cfg;
}

KeyValues to_key_values(const RunConfig& cfg) {
    KeyValues kv;
    auto put_path = [&](const char* key, const std::string& v) {
        if (!v.empty()) kv[key] = v;
    };
    put_path("input", cfg.input);
    put_path("input-imag", cfg.input_imag);
    kv["kind"] = to_string(cfg.kind);
    kv["n-theta"] = std::to_string(cfg.n_theta);
    kv["solver"] = to_string(cfg.solver);
    kv["c"] = fmt_double(cfg.solver_config.c);
    kv["tau"] = fmt_double(cfg.solver_config.tau);
    kv["max-iters"] = std::to_string(cfg.solver_config.max_iters);
    kv["tolerance"] = fmt_double(cfg.solver_config.tolerance);
    kv["log-every"] = std::to_string(cfg.solver_config.log_every);
    kv["anneal-factor"] = fmt_double(cfg.solver_config.anneal_factor);
    kv["anneal-floor"] = fmt_double(cfg.solver_config.anneal_floor);
    kv["pf-flow-weight"] = to_string(cfg.pf_flow_weight);
    kv["power"] = std::to_string(cfg.power);
    kv["scale"] = fmt_double(cfg.scale);
    kv["smoothness"] = fmt_double(cfg.smoothness);
    put_path("smoothness-map", cfg.smoothness_map);
    put_path("out-labels", cfg.out_labels);
    put_path("out-u", cfg.out_u);
    put_path("out-trace", cfg.out_trace);
    put_path("out-preview", cfg.out_preview);
    put_path("out-data", cfg.out_data);
    put_path("out-config", cfg.out_config);
    return kv;
}

namespace {

CylinderGrid grid_for(const std::vector<std::size_t>& dims, int n_theta) {
    std::vector<long long> d(dims.begin(), dims.end());
    return make_grid(d, n_theta);
}

std::vector<double> to_signed(const std::vector<double>& unit) {
    std::vector<double> out(unit.size());
    for (std::size_t i = 0; i < unit.size(); ++i) out[i] = 2.0 * unit[i] - 1.0;
    return out;
}

} // namespace

CyclicObservation load_input(const RunConfig& cfg) {
    switch (cfg.kind) {
    case InputKind::complex_pair: {
        const bool re_field = is_field_file(cfg.input);
        const bool im_field = is_field_file(cfg.input_imag);
        if (re_field != im_field)
            throw std::invalid_argument("complex pair mixes a field file with an image");
        if (re_field) {
            const auto re = load_spatial(cfg.input);
            const auto im = load_spatial(cfg.input_imag);
            if (re.grid().spatial_dims() != im.grid().spatial_dims())
                throw std::invalid_argument("real and imaginary fields differ in shape");
            const auto g = grid_for(re.grid().spatial_dims(), cfg.n_theta);
            return phase_from_complex(g, re.values(), im.values());
        }
        const auto re = read_netpbm(cfg.input);
        const auto im = read_netpbm(cfg.input_imag);
        if (re.channels != 1 || im.channels != 1)
            throw std::invalid_argument("complex-pair images must be grayscale (P5)");
        if (re.width != im.width || re.height != im.height)
            throw std::invalid_argument("real and imaginary images differ in size");
        const auto g = grid_for({re.height, re.width}, cfg.n_theta);
        const auto rv = to_signed(re.samples), iv = to_signed(im.samples);
        return phase_from_complex(g, rv, iv);
    }
    case InputKind::rgb: {
        const auto img = read_netpbm(cfg.input);
        if (img.channels != 3) throw std::invalid_argument("rgb input must be a colour image (P6)");
        const auto g = grid_for({img.height, img.width}, cfg.n_theta);
        const auto r = img.plane(0), gr = img.plane(1), b = img.plane(2);
        return hue_from_rgb(g, r, gr, b);
    }
    case InputKind::raw_field: {
        const auto f = load_spatial(cfg.input);
        const auto g = grid_for(f.grid().spatial_dims(), cfg.n_theta);
        SpatialField angle(g), weight(g, 1.0);
        for (std::size_t v = 0; v < g.num_voxels(); ++v) angle[v] = wrap_angle(f[v]);
        return make_observation(g, std::move(angle), std::move(weight));
    }
    }
    throw std::logic_error("unhandled input kind");
}

namespace {

CyclicField load_smoothness(const RunConfig& cfg, const CylinderGrid& g) {
    if (cfg.smoothness_map.empty()) return constant_field(g, cfg.smoothness);
    const auto header = decode_header(read_file_bytes(cfg.smoothness_map));
    if (header.grid.spatial_dims() != g.spatial_dims())
        throw std::invalid_argument("smoothness map shape does not match the input");
    if (header.kind == FieldKind::spatial) {
        const auto s = load_spatial(cfg.smoothness_map);
        return broadcast_theta(SpatialField(g, std::vector<double>(s.values().begin(), s.values().end())));
    }
    if (header.kind == FieldKind::cyclic) {
        const auto s = load_cyclic(cfg.smoothness_map);
        if (s.grid().n_theta() != g.n_theta())
            throw std::invalid_argument("cyclic smoothness map has a different n_theta");
        return s;
    }
    throw std::invalid_argument("smoothness map must be a spatial or cyclic field");
}

void write_preview(const std::filesystem::path& path, const SpatialField& labels) {
    const auto& dims = labels.grid().spatial_dims();
    Image img;
    img.width = dims.back();
    img.height = labels.size() / img.width;
    const bool hue = path.extension() == ".ppm";
    img.channels = hue ? 3 : 1;
    for (double a : labels.values()) {
        if (hue) {
            double r, g, b;
            angle_to_rgb(a, r, g, b);
            img.samples.insert(img.samples.end(), {r, g, b});
        } else {
            img.samples.push_back(angle_to_byte(a) / 255.0);
        }
    }
    write_netpbm8(path, img);
}

} // namespace

RunOutcome run(const RunConfig& cfg) {
    cfg.validate();
    const CyclicObservation obs = load_input(cfg);
    RunOutcome out;
    out.data_term = build_data_term(obs, cfg.power, cfg.scale);
    out.smoothness = load_smoothness(cfg, obs.grid);

    if (cfg.solver == SolverKind::al) {
        out.result = solve_al(out.data_term, out.smoothness, cfg.solver_config);
    } else {
        PFOptions opts;
        opts.flow_weight = cfg.pf_flow_weight;
        out.result = solve_pf(out.data_term, out.smoothness, cfg.solver_config, {}, opts);
    }

    save_field(cfg.out_labels, out.result.labels);
    if (!cfg.out_u.empty()) save_field(cfg.out_u, out.result.final_u);
    if (!cfg.out_data.empty()) save_field(cfg.out_data, out.data_term);
    if (!cfg.out_trace.empty()) {
        std::ofstream f(cfg.out_trace, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + cfg.out_trace);
        write_trace_csv(f, out.result.trace);
        if (!f) throw std::runtime_error("write failed for " + cfg.out_trace);
    }
    if (!cfg.out_preview.empty()) write_preview(cfg.out_preview, out.result.labels);
    if (!cfg.out_config.empty()) {
        std::ofstream f(cfg.out_config, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + cfg.out_config);
        f << format_key_values(to_key_values(cfg));
    }
    return out;
}

void SynthParams::validate() const {
    if (dims.empty() || dims.size() > 3) throw std::invalid_argument("synth needs 1 to 3 dims");
    for (auto d : dims)
        if (d < 1) throw std::invalid_argument("synth dims must be >= 1");
    if (pattern != "two-phase" && pattern != "ramp" && pattern != "disk")
        throw std::invalid_argument("pattern must be two-phase, ramp or disk");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw std::invalid_argument("noise must be >= 0");
    if (n_theta < 2) throw std::invalid_argument("n-theta must be >= 2");
}

SynthData synthesize(const SynthParams& p) {
    p.validate();
    const auto g = make_grid(p.dims, p.n_theta);
    SynthData d{SpatialField(g), SpatialField(g), SpatialField(g), SpatialField(g)};
    const auto& dims = g.spatial_dims();
    const double a = wrap_angle(p.phase_a), b = wrap_angle(p.phase_b);
    const double min_dim = static_cast<double>(*std::min_element(dims.begin(), dims.end()));

    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t v = 0; v < g.num_voxels(); ++v) {
        double truth = a;
        if (p.pattern == "two-phase") {
            const std::size_t first = v / g.voxel_stride(0);
            truth = first < dims[0] / 2 ? a : b;
        } else if (p.pattern == "disk") {
            double r2 = 0.0;
            for (std::size_t ax = 0; ax < dims.size(); ++ax) {
                const double coord = static_cast<double>((v / g.voxel_stride(ax)) % dims[ax]);
                const double off = coord + 0.5 - static_cast<double>(dims[ax]) / 2.0;
                r2 += off * off;
            }
            truth = std::sqrt(r2) < min_dim / 3.0 ? b : a;
        } else {
            const std::size_t last = dims.size() - 1;
            const double x = static_cast<double>(v % dims[last]);
            truth = wrap_angle(a + kTwoPi * p.cycles * x / static_cast<double>(dims[last]));
        }
        d.truth[v] = truth;
        // sample then wrap; always draw so the stream does not depend on noise == 0
        const double n = noise(rng) * p.noise;
        d.observed[v] = p.noise == 0.0 ? truth : wrap_angle(truth + n);
        d.real_part[v] = std::cos(d.observed[v]);
        d.imag_part[v] = std::sin(d.observed[v]);
    }
    return d;
}

void write_synth(const SynthData& data, const SynthParams& p, const std::string& prefix) {
    save_field(prefix + "_truth.cmf", data.truth);
    save_field(prefix + "_real.cmf", data.real_part);
    save_field(prefix + "_imag.cmf", data.imag_part);
    std::ofstream meta(prefix + "_meta.txt", std::ios::trunc);
    if (!meta) throw std::runtime_error("cannot write " + prefix + "_meta.txt");
    std::string dims;
    for (std::size_t i = 0; i < p.dims.size(); ++i) dims += (i ? "," : "") + std::to_string(p.dims[i]);
    KeyValues kv{{"pattern", p.pattern},
                 {"dims", dims},
                 {"noise", fmt_double(p.noise)},
                 {"seed", std::to_string(p.seed)},
                 {"phase-a", fmt_double(p.phase_a)},
                 {"phase-b", fmt_double(p.phase_b)},
                 {"cycles", fmt_double(p.cycles)},
                 {"n-theta", std::to_string(p.n_theta)},
                 {"noise-model", "wrapped-gaussian"}};
    meta << format_key_values(kv);
}

int configure_threads_from_env() {
#ifdef _OPENMP
    if (const char* env = std::getenv("CMF_NUM_THREADS")) {
        const int n = std::atoi(env);
        if (n < 1) throw std::invalid_argument("CMF_NUM_THREADS must be a positive integer");
        omp_set_num_threads(n);
    }
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace cmf
