#ifndef CAVCOOL_IO_HPP
#define CAVCOOL_IO_HPP

// Experiment documents (JSON), frame and sweep CSV files, run summaries.
// Needs nlohmann/json on the include path.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cavcool/core.hpp"
#include "cavcool/dynamics.hpp"
#include "cavcool/ensemble.hpp"
#include "cavcool/meanfield.hpp"
#include "cavcool/observables.hpp"

namespace cavcool {

using Json = nlohmann::ordered_json;

/// Malformed or invalid experiment document. where() is a JSON path such as
/// "stages[1].schedule.t_ramp", or "line 4, column 7" for syntax errors.
class ConfigError : public InvalidArgument {
public:
    ConfigError(const std::string& where, const std::string& msg)
        : InvalidArgument(where.empty() ? msg : where + ": " + msg), where_(where)
    {
    }
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

struct SweepSpec {
    std::string parameter = "t_ramp";
    std::vector<double> values;
    std::optional<double> trajectory_budget;
};

/// What a config file describes: one ensemble run, or a sweep of runs.
struct ExperimentDocument {
    ExperimentConfig config;
    std::optional<SweepSpec> sweep;

    SweepConfig sweep_config() const
    {
        detail::require(sweep.has_value(), "document has no sweep block");
        return {config, sweep->parameter, sweep->values, sweep->trajectory_budget};
    }
};

// Enum names ---------------------------------------------------------------------

namespace detail {

inline const char* name_of(Model m) { return m == Model::full ? "full" : "reduced"; }
inline const char* name_of(FullScheme s) { return s == FullScheme::hybrid ? "hybrid" : "euler_maruyama"; }
inline const char* name_of(FieldHold h) { return h == FieldHold::linear ? "linear" : "frozen"; }
inline const char* name_of(InitialKind k) { return k == InitialKind::thermal ? "thermal" : "homogeneous"; }
inline const char* name_of(ScheduleKind k)
{
    switch (k) {
    case ScheduleKind::hold: return "hold";
    case ScheduleKind::quench: return "quench";
    case ScheduleKind::exp_ramp: return "exp_ramp";
    case ScheduleKind::piecewise: return "piecewise";
    }
    return "hold";
}

// Reader over one JSON object that tracks its path and rejects unknown keys.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "(root)" : path_, "expected an object");
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }
    const Json& at(const std::string& key) const
    {
        seen_.push_back(key);
        if (!j_.contains(key)) throw ConfigError(child(key), "missing required field");
        return j_.at(key);
    }

    double number(const std::string& key) const
    {
        const Json& v = at(key);
        if (!v.is_number()) throw ConfigError(child(key), "expected a number");
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    long long integer(const std::string& key) const
    {
        const Json& v = at(key);
        if (v.is_number_integer()) return v.get<long long>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
        }
        throw ConfigError(child(key), "expected an integer");
    }
    long long integer(const std::string& key, long long fallback) const { return has(key) ? integer(key) : fallback; }

    std::uint64_t seed(const std::string& key) const
    {
        const Json& v = at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
        throw ConfigError(child(key), "expected a non-negative integer");
    }

    bool boolean(const std::string& key, bool fallback) const
    {
        if (!has(key)) return fallback;
        const Json& v = at(key);
        if (!v.is_boolean()) throw ConfigError(child(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) const
    {
        const Json& v = at(key);
        if (!v.is_string()) throw ConfigError(child(key), "expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& fallback) const
    {
        return has(key) ? string(key) : fallback;
    }

    template <class Enum>
    Enum choice(const std::string& key, std::initializer_list<std::pair<const char*, Enum>> options, Enum fallback) const
    {
        if (!has(key)) return fallback;
        const std::string s = string(key);
        std::string allowed;
        for (const auto& [name, value] : options) {
            if (s == name) return value;
            allowed += allowed.empty() ? name : std::string(", ") + name;
        }
        throw ConfigError(child(key), "unknown value '" + s + "' (expected one of: " + allowed + ")");
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool known = false;
            for (const auto& k : seen_) known = known || k == it.key();
            if (!known) throw ConfigError(child(it.key()), "unknown field");
        }
    }

private:
    const Json& j_;
    std::string path_;
    mutable std::vector<std::string> seen_;
};

inline Schedule parse_schedule(const Json& j, const std::string& path)
{
    ObjectReader r(j, path);
    Schedule s;
    s.kind = r.choice<ScheduleKind>("kind",
                                    {{"hold", ScheduleKind::hold},
                                     {"quench", ScheduleKind::quench},
                                     {"exp_ramp", ScheduleKind::exp_ramp},
                                     {"piecewise", ScheduleKind::piecewise}},
                                    ScheduleKind::hold);
    if (s.kind == ScheduleKind::piecewise) {
        const Json& segs = r.at("segments");
        if (!segs.is_array()) throw ConfigError(r.child("segments"), "expected an array");
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const std::string p = r.child("segments") + "[" + std::to_string(i) + "]";
            ObjectReader sr(segs[i], p);
            ScheduleSegment seg;
            seg.t_start = sr.number("t_start");
            seg.schedule = parse_schedule(sr.at("schedule"), sr.child("schedule"));
            sr.finish();
            s.segments.push_back(std::move(seg));
        }
    } else {
        s.v0 = r.number("v0");
        s.t_ramp = r.number("t_ramp", 1.0);
        s.decades = r.number("decades", 5.0);
        s.v_before = r.number("v_before", s.kind == ScheduleKind::quench ? 0.0 : s.v0);
    }
    r.finish();
    try {
        s.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(path, e.what());
    }
    return s;
}

inline Json schedule_json(const Schedule& s)
{
    Json j;
    j["kind"] = name_of(s.kind);
    if (s.kind == ScheduleKind::piecewise) {
        j["segments"] = Json::array();
        for (const auto& seg : s.segments)
            j["segments"].push_back(Json{{"t_start", seg.t_start}, {"schedule", schedule_json(seg.schedule)}});
        return j;
    }
    j["v0"] = s.v0;
    j["t_ramp"] = s.t_ramp;
    j["decades"] = s.decades;
    j["v_before"] = s.v_before;
    return j;
}

// Validation failures in a finished config are reported against the nearest field.
template <class F>
void checked(const std::string& path, F&& f)
{
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(path, e.what());
    }
}

} // namespace detail

/// Builds a document from parsed JSON. A run summary is accepted too: its
/// "config" member is used, so summaries can be fed back as configs.
inline ExperimentDocument parse_document(const Json& root)
{
    if (root.is_object() && root.contains("config") && root.contains("seeds")) return parse_document(root.at("config"));
    detail::ObjectReader r(root, "");
    ExperimentDocument doc;
    ExperimentConfig& c = doc.config;
    c.name = r.string("name", "run");
    c.model = r.choice<Model>("model", {{"reduced", Model::reduced}, {"full", Model::full}}, Model::reduced);

    {
        detail::ObjectReader p(r.at("params"), "params");
        SystemParams& sp = c.params;
        sp.n_particles = static_cast<int>(p.integer("n_particles"));
        sp.kappa = p.number("kappa");
        sp.delta_c = p.has("delta_c") ? p.number("delta_c") : -sp.kappa;
        if (p.has("drive")) {
            detail::ObjectReader d(p.at("drive"), "params.drive");
            DriveFields f{d.number("g"), d.number("omega_rabi"), d.number("delta_a")};
            d.finish();
            detail::checked("params.drive", [&] { sp.scatter_rate = derive_scatter_rate(f.g, f.omega_rabi, f.delta_a); });
            sp.drive = f;
        } else {
            sp.scatter_rate = p.number("scatter_rate", 0.0);
        }
        p.finish();
        detail::checked("params", [&] { sp.validate(); });
    }

    {
        detail::ObjectReader p(r.at("initial"), "initial");
        InitialCondition& ic = c.initial;
        ic.kind = p.choice<InitialKind>("kind", {{"thermal", InitialKind::thermal}, {"homogeneous", InitialKind::homogeneous}},
                                        InitialKind::thermal);
        ic.e_kin = p.number("e_kin");
        ic.alpha = ic.kind == InitialKind::thermal ? p.number("alpha") : p.number("alpha", 0.0);
        ic.sign = static_cast<int>(p.integer("sign", 1));
        ic.random_sign = p.boolean("random_sign", false);
        p.finish();
        detail::checked("initial", [&] { ic.validate(); });
    }

    {
        const Json& stages = r.at("stages");
        if (!stages.is_array() || stages.empty()) throw ConfigError("stages", "expected a non-empty array");
        for (std::size_t i = 0; i < stages.size(); ++i) {
            const std::string path = "stages[" + std::to_string(i) + "]";
            detail::ObjectReader s(stages[i], path);
            Stage st;
            st.schedule = detail::parse_schedule(s.at("schedule"), s.child("schedule"));
            st.duration = s.number("duration");
            if (!(std::isfinite(st.duration) && st.duration >= 0.0))
                throw ConfigError(s.child("duration"), "must be >= 0");
            s.finish();
            c.stages.push_back(std::move(st));
        }
    }

    c.trajectories = static_cast<int>(r.integer("trajectories", 1));
    c.base_seed = r.has("seed") ? r.seed("seed") : 1;
    c.workers = static_cast<int>(r.integer("workers", 0));
    c.max_particle_steps = r.number("max_particle_steps", c.max_particle_steps);
    c.bootstrap_resamples = static_cast<int>(r.integer("bootstrap_resamples", 200));

    if (r.has("integrator")) {
        detail::ObjectReader p(r.at("integrator"), "integrator");
        IntegratorConfig& ig = c.integrator;
        ig.dt = p.number("dt", 0.0);
        ig.sampler_stride = static_cast<int>(p.integer("sample_stride", 100));
        ig.scheme = p.choice<FullScheme>("scheme", {{"hybrid", FullScheme::hybrid}, {"euler_maruyama", FullScheme::euler_maruyama}},
                                         FullScheme::hybrid);
        ig.hold = p.choice<FieldHold>("field_hold", {{"linear", FieldHold::linear}, {"frozen", FieldHold::frozen}},
                                      FieldHold::linear);
        ig.step_bound = p.number("step_bound", 0.05);
        p.finish();
        detail::checked("integrator", [&] { ig.validate(); });
    }

    if (r.has("sweep")) {
        detail::ObjectReader p(r.at("sweep"), "sweep");
        SweepSpec sw;
        sw.parameter = p.string("parameter");
        const Json& vals = p.at("values");
        if (!vals.is_array() || vals.empty()) throw ConfigError("sweep.values", "expected a non-empty array of numbers");
        for (const auto& v : vals) {
            if (!v.is_number()) throw ConfigError("sweep.values", "expected a non-empty array of numbers");
            sw.values.push_back(v.get<double>());
        }
        if (p.has("trajectory_budget")) sw.trajectory_budget = p.number("trajectory_budget");
        p.finish();
        bool known = false;
        for (const auto& name : sweepable_parameters()) known = known || name == sw.parameter;
        if (!known) throw ConfigError("sweep.parameter", "unknown parameter '" + sw.parameter + "'");
        doc.sweep = sw;
    }
    r.finish();
    detail::checked("", [&] { c.validate(); });
    if (doc.sweep) detail::checked("sweep", [&] { doc.sweep_config().validate(); });
    return doc;
}

/// Parses document text; syntax errors carry the line and column.
inline Json parse_json_text(const std::string& text)
{
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t end = std::min(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string msg = e.what();
        if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
        throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col), msg);
    }
}

inline ExperimentDocument parse_document(const std::string& text) { return parse_document(parse_json_text(text)); }

inline Json document_json(const ExperimentDocument& doc)
{
    const ExperimentConfig& c = doc.config;
    Json j;
    j["name"] = c.name;
    j["model"] = detail::name_of(c.model);
    Json params;
    params["n_particles"] = c.params.n_particles;
    params["kappa"] = c.params.kappa;
    params["delta_c"] = c.params.delta_c;
    if (c.params.drive)
        params["drive"] = {{"g", c.params.drive->g},
                           {"omega_rabi", c.params.drive->omega_rabi},
                           {"delta_a", c.params.drive->delta_a}};
    else
        params["scatter_rate"] = c.params.scatter_rate;
    j["params"] = params;
    j["initial"] = {{"kind", detail::name_of(c.initial.kind)},
                    {"alpha", c.initial.alpha},
                    {"e_kin", c.initial.e_kin},
                    {"sign", c.initial.sign},
                    {"random_sign", c.initial.random_sign}};
    j["stages"] = Json::array();
    for (const auto& s : c.stages)
        j["stages"].push_back(Json{{"schedule", detail::schedule_json(s.schedule)}, {"duration", s.duration}});
    j["trajectories"] = c.trajectories;
    j["seed"] = c.base_seed;
    j["workers"] = c.workers;
    j["max_particle_steps"] = c.max_particle_steps;
    j["bootstrap_resamples"] = c.bootstrap_resamples;
    j["integrator"] = {{"dt", c.integrator.dt},
                       {"sample_stride", c.integrator.sampler_stride},
                       {"scheme", detail::name_of(c.integrator.scheme)},
                       {"field_hold", detail::name_of(c.integrator.hold)},
                       {"step_bound", c.integrator.step_bound}};
    if (doc.sweep) {
        Json sw;
        sw["parameter"] = doc.sweep->parameter;
        sw["values"] = doc.sweep->values;
        if (doc.sweep->trajectory_budget) sw["trajectory_budget"] = *doc.sweep->trajectory_budget;
        j["sweep"] = sw;
    }
    return j;
}

/// Applies "a.b.c=value" to a JSON document. Array elements are addressed by
/// index ("stages.1.duration"). The value is read as JSON when it parses,
/// otherwise as a plain string.
inline void apply_override(Json& root, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--override", "expected key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    Json value;
    try {
        value = Json::parse(text);
    } catch (const Json::parse_error&) {
        value = text;
    }

    Json* node = &root;
    std::size_t start = 0;
    for (;;) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError(key, "empty path component");
        const bool last = dot == std::string::npos;
        if (node->is_array()) {
            char* end = nullptr;
            const unsigned long idx = std::strtoul(part.c_str(), &end, 10);
            if (*end != '\0' || idx >= node->size()) throw ConfigError(key, "no array element '" + part + "'");
            node = &(*node)[idx];
        } else if (node->is_object() || node->is_null()) {
            if (!last && !node->contains(part)) (*node)[part] = Json::object();
            node = &(*node)[part];
        } else {
            throw ConfigError(key, "'" + part + "' is not inside an object or array");
        }
        if (last) break;
        start = dot + 1;
    }
    *node = value;
}

// CSV ----------------------------------------------------------------------------

inline constexpr const char* frames_csv_header = "t,v,e_kin_mean,e_kin_stderr,kurtosis,theta2_mean,intensity";
inline constexpr const char* sweep_csv_header = "value,e_kin_final_mean,e_kin_final_stderr,trajectories";

/// 17 significant digits: enough to read every double back exactly.
inline std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_frames_csv(std::ostream& os, const std::vector<ObservableFrame>& frames)
{
    os << frames_csv_header << '\n';
    for (const auto& f : frames) {
        os << format_double(f.t) << ',' << format_double(f.v) << ',' << format_double(f.e_kin_mean) << ','
           << format_double(f.e_kin_stderr) << ',' << format_double(f.kurtosis) << ','
           << format_double(f.theta2_mean) << ',' << format_double(f.intensity) << '\n';
    }
}

namespace detail {

inline std::vector<double> split_numbers(const std::string& line, std::size_t expected, std::size_t line_no)
{
    std::vector<double> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || *end != '\0')
            throw InvalidArgument("csv line " + std::to_string(line_no) + ": bad number '" + cell + "'");
        out.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.size() != expected)
        throw InvalidArgument("csv line " + std::to_string(line_no) + ": expected " + std::to_string(expected) +
                              " columns");
    return out;
}

} // namespace detail

inline std::vector<ObservableFrame> read_frames_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != frames_csv_header) throw InvalidArgument("csv: unexpected header");
    std::vector<ObservableFrame> frames;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto v = detail::split_numbers(line, 7, line_no);
        frames.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6]});
    }
    return frames;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows)
{
    os << sweep_csv_header << '\n';
    for (const auto& r : rows)
        os << format_double(r.value) << ',' << format_double(r.e_kin_final_mean) << ','
           << format_double(r.e_kin_final_stderr) << ',' << r.trajectories << '\n';
}

inline std::vector<SweepRow> read_sweep_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != sweep_csv_header) throw InvalidArgument("csv: unexpected header");
    std::vector<SweepRow> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto v = detail::split_numbers(line, 4, line_no);
        rows.push_back({v[0], v[1], v[2], static_cast<int>(v[3])});
    }
    return rows;
}

// Summaries ----------------------------------------------------------------------

/// Quantities derived from the configuration before any simulation runs.
inline Json derived_json(const ExperimentConfig& c)
{
    Json j;
    const auto plan = plan_experiment(c);
    j["stages"] = Json::array();
    for (std::size_t i = 0; i < c.stages.size(); ++i) {
        const double v_max = schedule_max(c.stages[i].schedule, c.stages[i].duration);
        Json s;
        s["dt"] = plan[i].dt;
        s["steps"] = plan[i].steps;
        s["v_max"] = v_max;
        s["trap_frequency"] = trap_frequency(v_max);
        if (c.model == Model::full) s["scatter_rate_max"] = scatter_rate_for_coupling(v_max, c.params);
        j["stages"].push_back(s);
    }
    j["particle_steps"] = estimate_particle_steps(c);
    const RegimeReport reg = regime_check([&] {
        SystemParams p = c.params;
        double v_max = 0.0;
        for (const auto& s : c.stages) v_max = std::max(v_max, schedule_max(s.schedule, s.duration));
        p.scatter_rate = scatter_rate_for_coupling(v_max, p);
        return p;
    }(), std::sqrt(c.initial.e_kin));
    j["regime"] = {{"doppler_ratio", reg.doppler_ratio}, {"drive_ratio", reg.drive_ratio}, {"ok", reg.ok}};
    return j;
}

inline Json predictions_json(const ExperimentConfig& c)
{
    Json j;
    const ProtocolOptimum opt = protocol_optimum(c.params.delta_c, c.params.kappa);
    j["v_fer_opt"] = opt.v_fer_opt;
    j["e_kin_fer_at_opt"] = opt.e_kin_fer;
    j["e_kin_min"] = opt.e_kin_min;
    if (c.initial.kind == InitialKind::thermal && c.initial.alpha > 0.0) {
        const double a = c.initial.alpha;
        const double th = magnetization(a);
        j["initial_theta"] = th;
        j["initial_theta2"] = th * th;
        j["demag_ratio"] = demag_ratio(a).value;
        j["demag_e_kin_final"] = demag_ratio(a).value * c.initial.e_kin;
        if (a > 1.0) j["asymptotic_ratio"] = asymptotic_ratio(a);
    }
    const Schedule& s0 = c.stages.front().schedule;
    if (c.initial.kind == InitialKind::homogeneous && s0.kind == ScheduleKind::quench) {
        const TwoStagePrediction p = two_stage_prediction(c.params, s0.v0);
        j["quench_v"] = p.v_fer;
        j["quench_e_kin_fer"] = p.e_kin_fer;
        j["quench_alpha"] = p.alpha_fer;
        j["quench_theta2"] = p.theta2_fer;
        j["ramp_e_kin_par"] = p.e_kin_par;
    }
    return j;
}

inline Json summary_json(const ExperimentDocument& doc, const RunRecord& rec)
{
    const ExperimentConfig& c = doc.config;
    Json j;
    j["config"] = document_json(doc);
    j["seeds"] = {{"base_seed", c.base_seed},
                  {"trajectories", c.trajectories},
                  {"scheme", "philox4x32-10 key=base_seed counter=(block, trajectory, substream)"},
                  {"substreams", {{"initial_state", 0}, {"dynamics", 1}, {"bootstrap", 2}}}};
    j["derived"] = derived_json(c);
    Json stages = Json::array();
    for (std::size_t i = 0; i < rec.stage_first_frame.size(); ++i)
        stages.push_back({{"first_frame", rec.stage_first_frame[i]}, {"t_start", rec.frames[rec.stage_first_frame[i]].t}});
    j["stage_boundaries"] = stages;
    const ObservableFrame& f = rec.frames.back();
    Json fin = {{"t", f.t},
                {"v", f.v},
                {"e_kin_mean", f.e_kin_mean},
                {"e_kin_stderr", f.e_kin_stderr},
                {"theta2_mean", f.theta2_mean},
                {"intensity", f.intensity}};
    fin["kurtosis"] = std::isnan(f.kurtosis) ? Json(nullptr) : Json(f.kurtosis);
    j["final"] = fin;
    j["predictions"] = predictions_json(c);
    j["wall_seconds"] = rec.wall_seconds;
    return j;
}

inline Json sweep_summary_json(const ExperimentDocument& doc, const std::vector<SweepRow>& rows, double wall_seconds)
{
    Json j;
    j["config"] = document_json(doc);
    j["seeds"] = {{"base_seed", doc.config.base_seed},
                  {"scheme", "philox4x32-10 key=base_seed counter=(block, trajectory, substream)"},
                  {"note", "every sweep value reuses the same base seed"}};
    j["rows"] = Json::array();
    for (const auto& r : rows)
        j["rows"].push_back({{"value", r.value},
                             {"e_kin_final_mean", r.e_kin_final_mean},
                             {"e_kin_final_stderr", r.e_kin_final_stderr},
                             {"trajectories", r.trajectories}});
    j["predictions"] = predictions_json(doc.config);
    j["wall_seconds"] = wall_seconds;
    return j;
}

} // namespace cavcool

#endif // CAVCOOL_IO_HPP
