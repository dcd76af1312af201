#include "lfc/io.hpp"

#include "lfc/errors.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace lfc::io {

using nlohmann::json;
namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write file: " + path);
    out << content;
    if (!out)
        throw ConfigError("write failed: " + path);
}

json mat_to_json(const Mat& M) {
    json rows = json::array();
    for (int r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < M.cols(); ++c)
            row.push_back(M(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ConfigError(what + ": expected an array of rows");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Mat M(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols)
            throw ConfigError(what + ": ragged rows");
        for (int c = 0; c < cols; ++c)
            M(r, c) = j[r][c].get<double>();
    }
    return M;
}

Vec vec_from_json(const json& j, const std::string& what) {
    if (!j.is_array())
        throw ConfigError(what + ": expected an array");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<int>(i)) = j[i].get<double>();
    return v;
}

double get_num(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key) || !j[key].is_number())
        throw ConfigError(ctx + ": missing numeric field '" + key + "'");
    return j[key].get<double>();
}

// Strip bound given as a scalar (applied to every area) or per-area array.
Vec strip_bound(const json& j, const std::string& key, int n_areas, const std::string& ctx) {
    if (!j.contains(key))
        throw ConfigError(ctx + ": missing strip bound '" + key + "'");
    if (j[key].is_number())
        return Vec::Constant(n_areas, j[key].get<double>());
    Vec v = vec_from_json(j[key], ctx + "." + key);
    if (v.size() != n_areas)
        throw ConfigError(ctx + "." + key + ": need one bound per area");
    return v;
}

std::string iso_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json design_to_json(const synthesis::DesignSpec& d) {
    json j;
    j["gamma"]    = d.gamma;
    j["eps1"]     = d.eps1;
    j["eps2"]     = d.eps2;
    j["pd_floor"] = d.pd_floor;
    j["invariant_decay"] = d.invariant_decay;
    if (d.strips) {
        json s;
        s["control"]  = {{"a", std::vector<double>(d.strips->a1.begin(), d.strips->a1.end())},
                         {"b", std::vector<double>(d.strips->b1.begin(), d.strips->b1.end())}};
        s["observer"] = {{"a", std::vector<double>(d.strips->a2.begin(), d.strips->a2.end())},
                         {"b", std::vector<double>(d.strips->b2.begin(), d.strips->b2.end())}};
        j["strips"] = std::move(s);
    }
    return j;
}

synthesis::DesignSpec design_from_json(const json& j, int n_areas, const std::string& ctx) {
    synthesis::DesignSpec d;
    d.gamma = get_num(j, "gamma", ctx);
    d.eps1  = get_num(j, "eps1", ctx);
    d.eps2  = get_num(j, "eps2", ctx);
    if (j.contains("pd_floor"))
        d.pd_floor = get_num(j, "pd_floor", ctx);
    if (j.contains("invariant_decay"))
        d.invariant_decay = get_num(j, "invariant_decay", ctx);
    if (j.contains("strips")) {
        const auto& s = j["strips"];
        if (!s.contains("control") || !s.contains("observer"))
            throw ConfigError(ctx + ".strips: need 'control' and 'observer' sections");
        synthesis::StripBounds sb;
        sb.a1 = strip_bound(s["control"], "a", n_areas, ctx + ".strips.control");
        sb.b1 = strip_bound(s["control"], "b", n_areas, ctx + ".strips.control");
        sb.a2 = strip_bound(s["observer"], "a", n_areas, ctx + ".strips.observer");
        sb.b2 = strip_bound(s["observer"], "b", n_areas, ctx + ".strips.observer");
        d.strips = std::move(sb);
    }
    return d;
}

json parse(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw ConfigError(what + ": invalid JSON");
    return j;
}

} // namespace

RunConfig load_config(const std::string& path) {
    RunConfig cfg;
    cfg.source_path  = path;
    const auto text  = slurp(path);
    cfg.content_hash = fnv1a_hex(text);
    const json j     = parse(text, path);

    if (!j.contains("system") || !j["system"].contains("areas"))
        throw ConfigError(path + ": missing system.areas");
    const auto& jareas = j["system"]["areas"];
    if (!jareas.is_array() || jareas.empty())
        throw ConfigError(path + ": system.areas must be a non-empty array");

    int idx = 0;
    for (const auto& ja : jareas) {
        model::AreaParams p;
        p.name = ja.value("name", "area" + std::to_string(idx + 1));
        p.M    = get_num(ja, "M", p.name);
        p.D    = get_num(ja, "D", p.name);
        p.Tg   = get_num(ja, "Tg", p.name);
        p.Tch  = get_num(ja, "Tch", p.name);
        p.R    = get_num(ja, "R", p.name);
        p.beta = get_num(ja, "beta", p.name);
        p.validate();
        cfg.areas.push_back(std::move(p));
        ++idx;
    }
    const int N = static_cast<int>(cfg.areas.size());

    cfg.ties = model::TieLines::zero(N);
    if (j["system"].contains("tie_lines")) {
        for (const auto& jt : j["system"]["tie_lines"]) {
            if (!jt.contains("areas") || !jt["areas"].is_array() || jt["areas"].size() != 2)
                throw ConfigError(path + ": tie_lines entries need 'areas': [i, j]");
            const int a = jt["areas"][0].get<int>() - 1; // config uses 1-based areas
            const int b = jt["areas"][1].get<int>() - 1;
            if (a < 0 || b < 0 || a >= N || b >= N || a == b)
                throw ConfigError(path + ": tie_lines area pair out of range");
            const double T = get_num(jt, "T", path + ": tie_lines");
            cfg.ties.T(a, b) = T;
            cfg.ties.T(b, a) = T;
        }
    }
    cfg.ties.validate();

    if (!j.contains("design"))
        throw ConfigError(path + ": missing design section");
    cfg.design = design_from_json(j["design"], N, path + ": design");
    cfg.design.validate(N);

    if (j.contains("output_selection")) {
        const auto& jo = j["output_selection"];
        if (jo.contains("state_weights"))
            cfg.state_weights = vec_from_json(jo["state_weights"], path + ": state_weights");
        if (jo.contains("error_weights"))
            cfg.error_weights = vec_from_json(jo["error_weights"], path + ": error_weights");
    }

    if (j.contains("simulation")) {
        const auto& js = j["simulation"];
        cfg.simc.t_end = get_num(js, "t_end", path + ": simulation");
        cfg.simc.dt    = js.value("dt", 1e-3);
        cfg.simc.record_stride = js.value("record_stride", 10);
        cfg.simc.validate();
        if (js.contains("events")) {
            for (const auto& je : js["events"]) {
                sim::DisturbanceEvent ev;
                ev.time = get_num(je, "time", path + ": events");
                ev.area = je.value("area", 1) - 1;
                ev.step = get_num(je, "step", path + ": events");
                cfg.schedule.events.push_back(ev);
            }
        }
        cfg.schedule.validate(N);
    }
    return cfg;
}

model::CompositeSystem build_system(const RunConfig& cfg) {
    return model::build_composite(cfg.areas, cfg.ties);
}

model::OutputSelection output_selection(const RunConfig& cfg,
                                        const model::CompositeSystem& sys) {
    if (!cfg.state_weights && !cfg.error_weights)
        return model::default_output_selection(sys);
    const int n = sys.n();
    Vec wx = cfg.state_weights ? *cfg.state_weights : Vec::Ones(n);
    Vec we = cfg.error_weights ? *cfg.error_weights : Vec::Ones(n);
    if (wx.size() != n || we.size() != n)
        throw ConfigError("output selection: weight vectors must have one entry per state");
    auto out = model::OutputSelection::from_diagonal(wx, we);
    out.validate_block_diagonal(sys);
    return out;
}

// --- gains -------------------------------------------------------------------

namespace {

json certificate_to_json(const lmi::LmiSolution& sol) {
    json jc;
    jc["feasible"] = sol.feasible;
    jc["margin"]   = sol.margin;
    jc["blocking"] = sol.blocking;
    json res       = json::array();
    for (std::size_t i = 0; i < sol.residuals.size(); ++i)
        res.push_back({{"lmi", sol.lmi_names[i]}, {"lambda_max", sol.residuals[i]}});
    jc["residuals"]         = std::move(res);
    jc["newton_iterations"] = sol.newton_iterations;
    jc["outer_iterations"]  = sol.outer_iterations;
    jc["final_step_norm"]   = sol.final_step_norm;
    return jc;
}

} // namespace

void save_gains(const std::string& path, const GainsFile& gf,
                const lmi::LmiSolution* certificate) {
    json j;
    j["format_version"] = 1;
    j["tool"]           = kToolVersion;
    j["strategy"]       = gf.strategy;
    j["config_hash"]    = gf.config_hash;
    j["n_areas"]        = gf.gains.n_areas();
    j["design"]         = design_to_json(gf.design);
    json areas          = json::array();
    for (const auto& g : gf.gains.areas) {
        json ja;
        ja["K"]   = mat_to_json(g.K);
        ja["H"]   = mat_to_json(g.H);
        ja["Psi"] = mat_to_json(g.Psi);
        ja["Phi"] = mat_to_json(g.Phi);
        ja["G"]   = mat_to_json(g.G);
        ja["L1"]  = mat_to_json(g.L1);
        ja["L2"]  = mat_to_json(g.L2);
        ja["L"]   = mat_to_json(g.L);
        ja["Z"]   = mat_to_json(g.Z);
        ja["Q"]   = mat_to_json(g.Q);
        areas.push_back(std::move(ja));
    }
    j["areas"] = std::move(areas);
    if (certificate)
        j["certificate"] = certificate_to_json(*certificate);
    write_file(path, j.dump(2) + "\n");
}

GainsFile load_gains(const std::string& path) {
    const json j = parse(slurp(path), path);
    if (j.value("format_version", 0) != 1)
        throw IncompatibilityError(path + ": unsupported gains format version");
    GainsFile gf;
    gf.strategy    = j.value("strategy", "unknown");
    gf.config_hash = j.value("config_hash", "");
    const int n_areas = j.value("n_areas", 0);
    if (!j.contains("areas") || static_cast<int>(j["areas"].size()) != n_areas)
        throw IncompatibilityError(path + ": area count mismatch");
    gf.design      = design_from_json(j["design"], n_areas, path + ": design");
    for (const auto& ja : j["areas"]) {
        synthesis::AreaGains g;
        g.K   = mat_from_json(ja.at("K"), path + ": K");
        g.H   = mat_from_json(ja.at("H"), path + ": H");
        g.Psi = mat_from_json(ja.at("Psi"), path + ": Psi");
        g.Phi = mat_from_json(ja.at("Phi"), path + ": Phi");
        g.G   = mat_from_json(ja.at("G"), path + ": G");
        g.L1  = mat_from_json(ja.at("L1"), path + ": L1");
        g.L2  = mat_from_json(ja.at("L2"), path + ": L2");
        g.L   = mat_from_json(ja.at("L"), path + ": L");
        g.Z   = mat_from_json(ja.at("Z"), path + ": Z");
        g.Q   = mat_from_json(ja.at("Q"), path + ": Q");
        gf.gains.areas.push_back(std::move(g));
    }
    return gf;
}

void save_certificate(const std::string& path, const lmi::LmiSolution& sol) {
    json j              = certificate_to_json(sol);
    j["format_version"] = 1;
    j["tool"]           = kToolVersion;
    write_file(path, j.dump(2) + "\n");
}

// --- trajectory / metrics -----------------------------------------------------

void write_trajectory_csv(const std::string& path, const sim::Trajectory& t) {
    std::ostringstream os;
    os << "# lfckit-trajectory v1\n";
    os << "time";
    static const char* kStateNames[] = {"df", "dpm", "dpv", "dptie", "iace"};
    for (int i = 0; i < t.n_areas; ++i)
        for (const char* s : kStateNames)
            os << "," << s << "_" << (i + 1);
    for (int i = 0; i < t.n_areas; ++i)
        os << ",u_" << (i + 1);
    for (int i = 0; i < t.n_areas; ++i)
        os << ",d_" << (i + 1);
    for (int i = 0; i < t.n_areas; ++i)
        for (const char* s : kStateNames)
            os << ",err_" << s << "_" << (i + 1);
    os << "\n";

    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << "," << buf;
    };
    for (int k = 0; k < t.samples(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", t.time(k));
        os << buf;
        for (int c = 0; c < t.x.cols(); ++c)
            put(t.x(k, c));
        for (int c = 0; c < t.u.cols(); ++c)
            put(t.u(k, c));
        for (int c = 0; c < t.d.cols(); ++c)
            put(t.d(k, c));
        for (int c = 0; c < t.e.cols(); ++c)
            put(t.e(k, c));
        os << "\n";
    }
    write_file(path, os.str());
}

namespace {

json metrics_to_json(const sim::Metrics& m) {
    json j;
    j["band"] = m.band;
    auto sig  = [](const sim::SignalMetrics& s) {
        return json{{"peak_abs", s.peak_abs}, {"ise", s.ise}, {"settle_time", s.settle_time}};
    };
    json jdf = json::array(), jt = json::array();
    for (const auto& s : m.df)
        jdf.push_back(sig(s));
    for (const auto& s : m.dptie)
        jt.push_back(sig(s));
    j["df"]              = std::move(jdf);
    j["dptie"]           = std::move(jt);
    j["total_ise_df"]    = m.total_ise_df;
    j["total_ise_dptie"] = m.total_ise_dptie;
    return j;
}

} // namespace

void write_metrics_json(const std::string& path, const sim::Metrics& m,
                        const std::string& label) {
    json j              = metrics_to_json(m);
    j["format_version"] = 1;
    j["label"]          = label;
    write_file(path, j.dump(2) + "\n");
}

std::string metrics_table(const std::vector<std::pair<std::string, sim::Metrics>>& entries) {
    std::ostringstream os;
    os << "signal        metric        ";
    for (const auto& [label, m] : entries) {
        (void)m;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%16s", label.c_str());
        os << buf;
    }
    os << "\n";
    const int n_areas = entries.empty() ? 0 : static_cast<int>(entries[0].second.df.size());
    auto row = [&](const std::string& sig, const std::string& met, auto getter) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-13s %-13s", sig.c_str(), met.c_str());
        os << buf;
        for (const auto& [label, m] : entries) {
            (void)label;
            std::snprintf(buf, sizeof buf, "%16.6g", getter(m));
            os << buf;
        }
        os << "\n";
    };
    for (int i = 0; i < n_areas; ++i) {
        const std::string df = "df_" + std::to_string(i + 1);
        row(df, "peak_abs", [i](const sim::Metrics& m) { return m.df[i].peak_abs; });
        row(df, "ise", [i](const sim::Metrics& m) { return m.df[i].ise; });
        row(df, "settle_time", [i](const sim::Metrics& m) { return m.df[i].settle_time; });
    }
    for (int i = 0; i < n_areas; ++i) {
        const std::string dp = "dptie_" + std::to_string(i + 1);
        row(dp, "peak_abs", [i](const sim::Metrics& m) { return m.dptie[i].peak_abs; });
        row(dp, "ise", [i](const sim::Metrics& m) { return m.dptie[i].ise; });
        row(dp, "settle_time", [i](const sim::Metrics& m) { return m.dptie[i].settle_time; });
    }
    row("total", "ise_df", [](const sim::Metrics& m) { return m.total_ise_df; });
    row("total", "ise_dptie", [](const sim::Metrics& m) { return m.total_ise_dptie; });
    return os.str();
}

void write_plot_script(const std::string& path, const std::string& csv_name, int n_areas) {
    std::ostringstream os;
    os << "# lfckit-plot v1 (gnuplot)\n";
    os << "set datafile separator ','\n";
    os << "set grid\nset key outside\nset xlabel 'time (s)'\n";
    os << "set term pngcairo size 1100,700\n";
    os << "set output 'frequency_deviation.png'\n";
    os << "set ylabel 'frequency deviation (Hz)'\n";
    os << "plot ";
    for (int i = 0; i < n_areas; ++i)
        os << (i ? ", " : "") << "'" << csv_name << "' using 1:" << (2 + 5 * i)
           << " with lines title 'area " << (i + 1) << "'";
    os << "\n";
    os << "set output 'tie_line_deviation.png'\n";
    os << "set ylabel 'tie-line power deviation (p.u.)'\n";
    os << "plot ";
    for (int i = 0; i < n_areas; ++i)
        os << (i ? ", " : "") << "'" << csv_name << "' using 1:" << (5 + 5 * i)
           << " with lines title 'area " << (i + 1) << "'";
    os << "\n";
    write_file(path, os.str());
}

void write_spectra_csv(const std::string& path, const analysis::VerificationReport& rep) {
    std::ostringstream os;
    os << "# lfckit-spectra v1\n";
    os << "re,im,block\n";
    os.precision(17);
    auto emit = [&](const std::vector<std::complex<double>>& vals, const char* label) {
        for (const auto& v : vals)
            os << v.real() << "," << v.imag() << "," << label << "\n";
    };
    emit(rep.control_spectrum, "control");
    emit(rep.control_spectrum_decoupled, "control_decoupled");
    emit(rep.observer_spectrum, "observer");
    emit(rep.closed_loop_spectrum, "closed_loop");
    write_file(path, os.str());
}

void write_verification_json(const std::string& path, const analysis::VerificationReport& rep,
                             const std::string& gains_path) {
    json j;
    j["format_version"] = 1;
    j["tool"]           = kToolVersion;
    j["gains_file"]     = gains_path;
    auto spec_to_json   = [](const std::vector<std::complex<double>>& vals) {
        json arr = json::array();
        for (const auto& v : vals)
            arr.push_back({v.real(), v.imag()});
        return arr;
    };
    j["closed_loop_spectrum"]         = spec_to_json(rep.closed_loop_spectrum);
    j["closed_loop_spectrum_reduced"] = spec_to_json(rep.closed_loop_spectrum_reduced);
    j["invariant_present"]            = rep.invariant_present;
    if (rep.invariant_present)
        j["invariant_mode_real"] = rep.invariant_mode_real;
    j["hurwitz"] = rep.hurwitz;
    j["hinf"] = {{"value", rep.hinf.value}, {"peak_omega", rep.hinf.peak_omega},
                 {"grid_points", rep.hinf.grid.points},
                 {"omega_lo", rep.hinf.grid.omega_lo}, {"omega_hi", rep.hinf.grid.omega_hi}};
    j["gamma"]             = rep.gamma;
    j["hinf_ok"]           = rep.hinf_ok;
    j["analysis_residual"] = rep.analysis_residual;
    j["analysis_ok"]       = rep.analysis_ok;
    if (rep.has_strips) {
        auto entries = [](const std::vector<analysis::StripCheck::Entry>& es) {
            json arr = json::array();
            for (const auto& e : es)
                arr.push_back({{"re", e.lambda.real()}, {"im", e.lambda.imag()},
                               {"a", e.a}, {"b", e.b}, {"inside", e.inside}});
            return arr;
        };
        j["strips"] = {{"pass", rep.strips.pass}, {"control", entries(rep.strips.control)},
                       {"observer", entries(rep.strips.observer)}};
    }
    j["pass"] = rep.pass();
    write_file(path, j.dump(2) + "\n");
}

// --- manifest -----------------------------------------------------------------

void manifest_update(const std::string& run_dir, const std::string& config_path,
                     const std::string& config_hash, const std::string& strategy,
                     const std::vector<std::pair<std::string, std::string>>& artifacts) {
    const fs::path mpath = fs::path(run_dir) / "manifest.json";
    json j;
    if (fs::exists(mpath))
        j = parse(slurp(mpath.string()), mpath.string());
    j["format_version"] = 1;
    j["tool"]           = kToolVersion;
    j["updated_utc"]    = iso_utc_now();
    j["config_path"]    = config_path;
    j["config_hash"]    = config_hash;
    if (!strategy.empty())
        j["strategy"] = strategy;
    if (!j.contains("artifacts"))
        j["artifacts"] = json::object();
    for (const auto& [key, file] : artifacts)
        j["artifacts"][key] = file;
    write_file(mpath.string(), j.dump(2) + "\n");
}

// --- reports -------------------------------------------------------------------

namespace {

struct RunArtifacts {
    json manifest, certificate, verification, metrics;
    bool has_manifest = false, has_certificate = false, has_verification = false,
         has_metrics = false, has_trajectory = false, has_gains = false;
};

RunArtifacts load_run_dir(const std::string& dir) {
    RunArtifacts a;
    auto try_load = [&](const char* name, json& dst, bool& flag) {
        const fs::path p = fs::path(dir) / name;
        if (fs::exists(p)) {
            dst  = parse(slurp(p.string()), p.string());
            flag = true;
        }
    };
    try_load("manifest.json", a.manifest, a.has_manifest);
    try_load("certificate.json", a.certificate, a.has_certificate);
    try_load("verification.json", a.verification, a.has_verification);
    try_load("metrics.json", a.metrics, a.has_metrics);
    a.has_trajectory = fs::exists(fs::path(dir) / "trajectory.csv");
    a.has_gains      = fs::exists(fs::path(dir) / "gains.json");
    return a;
}

void report_section(std::ostringstream& os, const RunArtifacts& a) {
    if (a.has_manifest) {
        os << "run\n";
        os << "  config:      " << a.manifest.value("config_path", "?") << "\n";
        os << "  config hash: " << a.manifest.value("config_hash", "?") << "\n";
        os << "  strategy:    " << a.manifest.value("strategy", "?") << "\n";
        os << "  updated:     " << a.manifest.value("updated_utc", "?") << "\n";
    }
    if (a.has_certificate) {
        const auto& c = a.certificate;
        os << "certificate\n";
        os << "  feasible: " << (c.value("feasible", false) ? "yes" : "no") << "\n";
        os << "  margin:   " << c.value("margin", 0.0) << "\n";
        if (c.contains("residuals")) {
            os << "  residuals (lambda_max per LMI):\n";
            for (const auto& r : c["residuals"])
                os << "    " << r.value("lmi", "?") << ": " << r.value("lambda_max", 0.0)
                   << "\n";
        }
    }
    if (a.has_verification) {
        const auto& v = a.verification;
        os << "verification\n";
        os << "  hurwitz:           " << (v.value("hurwitz", false) ? "PASS" : "FAIL") << "\n";
        os << "  hinf estimate:     " << v["hinf"].value("value", 0.0) << " (gamma "
           << v.value("gamma", 0.0) << ") " << (v.value("hinf_ok", false) ? "PASS" : "FAIL")
           << "\n";
        os << "  analysis residual: " << v.value("analysis_residual", 0.0) << " "
           << (v.value("analysis_ok", false) ? "PASS" : "FAIL") << "\n";
        if (v.contains("strips"))
            os << "  strip containment: "
               << (v["strips"].value("pass", false) ? "PASS" : "FAIL") << "\n";
        os << "  overall:           " << (v.value("pass", false) ? "PASS" : "FAIL") << "\n";
    }
    if (a.has_metrics) {
        const auto& m = a.metrics;
        os << "simulation metrics (" << m.value("label", "run") << ")\n";
        os << "  total ISE df:    " << m.value("total_ise_df", 0.0) << "\n";
        os << "  total ISE dptie: " << m.value("total_ise_dptie", 0.0) << "\n";
        for (std::size_t i = 0; i < m["df"].size(); ++i)
            os << "  area " << (i + 1) << ": peak|df| " << m["df"][i].value("peak_abs", 0.0)
               << ", settle " << m["df"][i].value("settle_time", 0.0) << " s\n";
    }
}

} // namespace

ReportResult build_report(const std::string& run_dir) {
    ReportResult result;
    const auto a = load_run_dir(run_dir);
    std::ostringstream os;
    os << "lfckit run report: " << run_dir << "\n";
    os << std::string(60, '-') << "\n";
    report_section(os, a);

    if (!a.has_manifest)
        result.missing.push_back("manifest.json");
    if (!a.has_gains)
        result.missing.push_back("gains.json");
    if (!a.has_certificate)
        result.missing.push_back("certificate.json");
    if (!a.has_verification)
        result.missing.push_back("verification.json");
    if (!a.has_metrics)
        result.missing.push_back("metrics.json");
    if (!a.has_trajectory)
        result.missing.push_back("trajectory.csv");
    if (!result.missing.empty()) {
        os << "missing artifacts\n";
        for (const auto& m : result.missing)
            os << "  " << m << "\n";
    }
    result.text = os.str();
    return result;
}

std::string build_comparison_report(const std::string& dir_a, const std::string& dir_b) {
    const auto a = load_run_dir(dir_a);
    const auto b = load_run_dir(dir_b);
    std::ostringstream os;
    os << "lfckit run comparison\n";
    os << "  A: " << dir_a << "\n  B: " << dir_b << "\n";
    os << std::string(60, '-') << "\n";
    auto line = [&](const std::string& what, const json& ja, const json& jb,
                    auto extract) {
        os << "  " << what << ": A=";
        if (ja.is_null())
            os << "n/a";
        else
            os << extract(ja);
        os << "  B=";
        if (jb.is_null())
            os << "n/a";
        else
            os << extract(jb);
        os << "\n";
    };
    line("strategy", a.has_manifest ? a.manifest : json(), b.has_manifest ? b.manifest : json(),
         [](const json& j) { return j.value("strategy", "?"); });
    auto num = [](const std::string& key) {
        return [key](const json& j) { return std::to_string(j.value(key, 0.0)); };
    };
    line("certificate margin", a.has_certificate ? a.certificate : json(),
         b.has_certificate ? b.certificate : json(), num("margin"));
    line("hinf estimate", a.has_verification ? a.verification["hinf"] : json(),
         b.has_verification ? b.verification["hinf"] : json(), num("value"));
    line("total ISE df", a.has_metrics ? a.metrics : json(),
         b.has_metrics ? b.metrics : json(), num("total_ise_df"));
    line("total ISE dptie", a.has_metrics ? a.metrics : json(),
         b.has_metrics ? b.metrics : json(), num("total_ise_dptie"));
    return os.str();
}

} // namespace lfc::io
