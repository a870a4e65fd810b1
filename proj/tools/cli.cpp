#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "camel/capacity.hpp"
#include "camel/errors.hpp"
#include "camel/flow.hpp"
#include "camel/leray.hpp"
#include "camel/waveform.hpp"
#include "oracles.hpp"

namespace camel::cli {

namespace {

using json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tabular series: cells are numbers, strings, booleans, arrays (expanded to
/// name_1..name_k in CSV) or {re, im} objects (name_re, name_im).
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;
};

struct Result {
    json summary = json::object();
    Table table;
};

json cplx_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json vec_json(const Vec& v)
{
    json a = json::array();
    for(Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(v(i));
    return a;
}

// Readers fill missing keys with their defaults so the echoed config is complete.

json& section(json& p, const std::string& key)
{
    if(!p.contains(key))
        p[key] = json::object();
    if(!p[key].is_object())
        throw ConfigError("'" + key + "' must be an object");
    return p[key];
}

double num(json& p, const std::string& key, double def)
{
    if(!p.contains(key))
        p[key] = def;
    if(!p[key].is_number())
        throw ConfigError("'" + key + "' must be a number");
    return p[key].get<double>();
}

double num_req(const json& p, const std::string& key)
{
    if(!p.contains(key))
        throw ConfigError("missing '" + key + "'");
    if(!p.at(key).is_number())
        throw ConfigError("'" + key + "' must be a number");
    return p.at(key).get<double>();
}

long integer(json& p, const std::string& key, long def)
{
    if(!p.contains(key))
        p[key] = def;
    if(!p[key].is_number_integer())
        throw ConfigError("'" + key + "' must be an integer");
    return p[key].get<long>();
}

bool boolean(json& p, const std::string& key, bool def)
{
    if(!p.contains(key))
        p[key] = def;
    if(!p[key].is_boolean())
        throw ConfigError("'" + key + "' must be a boolean");
    return p[key].get<bool>();
}

std::string str(json& p, const std::string& key, const std::string& def, const std::vector<std::string>& allowed)
{
    if(!p.contains(key))
        p[key] = def;
    if(!p[key].is_string())
        throw ConfigError("'" + key + "' must be a string");
    const std::string s = p[key].get<std::string>();
    if(std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
        std::string list;
        for(const auto& a : allowed)
            list += (list.empty() ? "" : "|") + a;
        throw ConfigError("'" + key + "' must be one of " + list);
    }
    return s;
}

Vec to_vec(const json& a, const std::string& key)
{
    if(!a.is_array())
        throw ConfigError("'" + key + "' must be an array of numbers");
    Vec v(a.size());
    for(std::size_t i = 0; i < a.size(); ++i) {
        if(!a[i].is_number())
            throw ConfigError("'" + key + "' must be an array of numbers");
        v(i) = a[i].get<double>();
    }
    return v;
}

Vec vec(json& p, const std::string& key, const Vec& def)
{
    if(!p.contains(key))
        p[key] = vec_json(def);
    return to_vec(p[key], key);
}

Vec vec_req(const json& p, const std::string& key)
{
    if(!p.contains(key))
        throw ConfigError("missing '" + key + "'");
    return to_vec(p.at(key), key);
}

Mat to_mat(const json& a, const std::string& key)
{
    if(!a.is_array() || a.empty())
        throw ConfigError("'" + key + "' must be a non-empty array of rows");
    const std::size_t cols = a[0].is_array() ? a[0].size() : 0;
    Mat M(a.size(), cols);
    for(std::size_t r = 0; r < a.size(); ++r) {
        if(!a[r].is_array() || a[r].size() != cols)
            throw ConfigError("'" + key + "' rows must have equal length");
        for(std::size_t c = 0; c < cols; ++c) {
            if(!a[r][c].is_number())
                throw ConfigError("'" + key + "' entries must be numbers");
            M(r, c) = a[r][c].get<double>();
        }
    }
    return M;
}

Polynomial to_poly(const json& j, const std::string& key)
{
    if(!j.is_object() || !j.contains("nvars") || !j.at("nvars").is_number_integer())
        throw ConfigError("'" + key + "' must be {nvars, terms}");
    Polynomial P(j.at("nvars").get<int>());
    if(j.contains("terms")) {
        if(!j.at("terms").is_array())
            throw ConfigError("'" + key + ".terms' must be an array");
        for(const auto& t : j.at("terms")) {
            if(!t.contains("coeff") || !t.contains("exponents") || !t.at("coeff").is_number() ||
               !t.at("exponents").is_array())
                throw ConfigError("'" + key + "' terms must be {coeff, exponents}");
            std::vector<int> e;
            for(const auto& x : t.at("exponents")) {
                if(!x.is_number_integer())
                    throw ConfigError("'" + key + "' exponents must be integers");
                e.push_back(x.get<int>());
            }
            P.add_term(std::move(e), t.at("coeff").get<double>());
        }
    }
    return P;
}

HamiltonianSpec to_hamiltonian(json& h)
{
    if(!h.is_object())
        throw ConfigError("'hamiltonian' must be an object");
    const std::string kind =
        str(h, "kind", "harmonic", {"quadratic", "harmonic", "free", "quartic", "magnetic", "reparameterized"});
    if(kind == "quadratic") {
        if(!h.contains("M"))
            throw ConfigError("quadratic hamiltonian needs 'M'");
        return HamiltonianSpec::quadratic(to_mat(h["M"], "M"), num(h, "c0", 0.0));
    }
    if(kind == "harmonic") {
        const Vec w = vec(h, "omega", Vec::Ones(1));
        return HamiltonianSpec::harmonic(w, vec(h, "mass", Vec::Ones(w.size())));
    }
    if(kind == "free") {
        const int n = static_cast<int>(integer(h, "n", 1));
        return HamiltonianSpec::free_particle(n, vec(h, "mass", Vec::Ones(std::max(n, 1))));
    }
    if(kind == "quartic")
        return HamiltonianSpec::quartic(vec(h, "omega", Vec::Ones(1)), num(h, "lambda", 0.1));
    if(kind == "magnetic") {
        if(!h.contains("A") || !h["A"].is_array() || !h.contains("U"))
            throw ConfigError("magnetic hamiltonian needs 'A' (array of polynomials) and 'U'");
        std::vector<Polynomial> A;
        for(const auto& a : h["A"])
            A.push_back(to_poly(a, "A"));
        const int n = static_cast<int>(A.size());
        return HamiltonianSpec::magnetic(std::move(A), to_poly(h["U"], "U"), vec(h, "mass", Vec::Ones(n)),
                                         num(h, "kappa", 0.0));
    }
    if(!h.contains("base"))
        throw ConfigError("reparameterized hamiltonian needs 'base'");
    const HamiltonianSpec base = to_hamiltonian(h["base"]);
    return HamiltonianSpec::reparameterized(base, vec_req(h, "coeffs"));
}

Vec grid(json& p, double lo, double hi, long count)
{
    json& g = section(p, "grid");
    const double a = num(g, "min", lo), b = num(g, "max", hi);
    const long n = integer(g, "count", count);
    if(n < 1)
        throw ConfigError("grid must contain at least one point");
    if(!(b >= a))
        throw ConfigError("grid max must not be below min");
    return n == 1 ? Vec::Constant(1, a) : Vec(Vec::LinSpaced(n, a, b));
}

// Leray index --------------------------------------------------------------

LagrangianLift line_lift(double theta)
{
    return make_lift(SouriauPoint{CMat::Constant(1, 1, std::exp(cplx(0.0, 2.0 * theta)))}, 2.0 * theta);
}

LagrangianLift to_lift(const json& j, const std::string& key)
{
    if(!j.is_object() || !j.contains("X") || !j.contains("P") || !j.contains("alpha"))
        throw ConfigError("'" + key + "' must be {X, P, alpha}");
    LagrangianFrame F{to_mat(j.at("X"), key + ".X"), to_mat(j.at("P"), key + ".P")};
    if(F.X.rows() != F.X.cols() || F.X.rows() != F.P.rows() || F.P.rows() != F.P.cols())
        throw ConfigError("'" + key + "' frames must be square and of equal size");
    if(!is_lagrangian_frame(F, 1e-8))
        throw ConfigError("'" + key + "' does not span a Lagrangian plane");
    return make_lift(F, num_req(j, "alpha"));
}

std::vector<int> to_winding(const json& a, const std::string& key)
{
    if(!a.is_array())
        throw ConfigError("'" + key + "' must be an array of integers");
    std::vector<int> w;
    for(const auto& x : a) {
        if(!x.is_number_integer())
            throw ConfigError("'" + key + "' must be an array of integers");
        w.push_back(x.get<int>());
    }
    return w;
}

LagrangianLift random_lift(int n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    const CMat U = random_unitary(n, rng);
    SouriauPoint w{U * U.transpose()};
    return lift_near(w, u(rng));
}

Result run_index(json& p, std::uint64_t seed, double tol)
{
    Result r;
    const std::string mode = str(p, "mode", "grid", {"grid", "pair", "loop", "argument", "identities"});
    if(mode == "grid") {
        const double lo = num(p, "theta_min", -2.0 * kPi + 0.05), hi = num(p, "theta_max", 2.0 * kPi - 0.05);
        const long count = integer(p, "count", 21);
        if(count < 1 || !(hi >= lo))
            throw ConfigError("grid needs count >= 1 and theta_max >= theta_min");
        r.table.columns = {"theta", "theta_prime", "m", "closed_form"};
        long mismatches = 0, evaluated = 0;
        for(long i = 0; i < count; ++i)
            for(long k = 0; k < count; ++k) {
                const double th = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
                const double tp = count == 1 ? lo : lo + (hi - lo) * k / (count - 1);
                const int m = leray_index(line_lift(th), line_lift(tp));
                const double q = (th - tp) / kPi;
                json closed = nullptr;
                if(std::abs(q - std::round(q)) > tol) {
                    const int c = static_cast<int>(std::floor(q)) + 1;
                    closed = c;
                    mismatches += c != m;
                    ++evaluated;
                }
                r.table.rows.push_back({th, tp, m, closed});
            }
        r.summary = {{"points", count * count}, {"compared", evaluated}, {"mismatches", mismatches}};
    } else if(mode == "pair") {
        if(!p.contains("a") || !p.contains("b"))
            throw ConfigError("pair mode needs 'a' and 'b'");
        const LagrangianLift a = to_lift(p["a"], "a"), b = to_lift(p["b"], "b");
        if(a.dim() != b.dim())
            throw ConfigError("'a' and 'b' must have the same dimension");
        r.summary = {{"m", leray_index(a, b)},
                     {"transversal", transversal(a.w, b.w)},
                     {"intersection_dim", intersection_dim(a.w, b.w)}};
    } else if(mode == "loop") {
        const Vec radii = vec(p, "radii", Vec::Ones(1));
        if(!p.contains("winding"))
            p["winding"] = std::vector<int>(radii.size(), 1);
        const std::vector<int> mu = to_winding(p["winding"], "winding");
        const TorusSpec t(radii);
        int expected = 0;
        for(int m : mu)
            expected += 2 * m;
        r.summary = {{"maslov", torus_loop_maslov(t, mu)}, {"expected", expected}};
    } else if(mode == "argument") {
        const Vec radii = vec(p, "radii", Vec::Ones(1));
        const int flat = static_cast<int>(integer(p, "flat", 0));
        const Vec coords = vec(p, "coords", Vec::Constant(radii.size() + flat, 0.5));
        const ManifoldSpec m = TorusSpec(radii, flat);
        if(coords.size() != manifold_dim(m))
            throw ConfigError("'coords' must have one entry per manifold dimension");
        const LagrangianLift base = make_lift(vertical_frame(manifold_dim(m)), 0.0);
        r.summary = {{"argument_index", argument_index_on_manifold(m, CoverPoint{coords}, base)}};
        if(radii.size() == 1 && flat == 0)
            r.summary["closed_form"] = circle_argument_index(coords(0));
    } else {
        const int n = static_cast<int>(integer(p, "n", 2));
        const long trials = integer(p, "trials", 200);
        if(n < 1 || trials < 1)
            throw ConfigError("identities need n >= 1 and trials >= 1");
        std::mt19937_64 rng(seed);
        long cocycle = 0, diagonal = 0, shifts = 0;
        for(long k = 0; k < trials; ++k) {
            const LagrangianLift a = random_lift(n, rng), b = random_lift(n, rng), c = random_lift(n, rng);
            const int lhs = leray_index(a, b) - leray_index(a, c) + leray_index(b, c);
            cocycle += lhs != inert(a.w, b.w, c.w);
            diagonal += leray_index(a, a) != n;
            std::uniform_int_distribution<int> kk(-3, 3);
            const int s = kk(rng), t = kk(rng);
            shifts += leray_index(deck_act(s, a), deck_act(t, b)) != leray_index(a, b) + s - t;
        }
        r.summary = {{"trials", trials},
                     {"cocycle_failures", cocycle},
                     {"diagonal_failures", diagonal},
                     {"deck_shift_failures", shifts},
                     {"passed", cocycle == 0 && diagonal == 0 && shifts == 0}};
    }
    return r;
}

// Capacities ---------------------------------------------------------------

Result run_capacity(json& p, double tol)
{
    Result r;
    Vec radii;
    if(p.contains("ball")) {
        json& b = section(p, "ball");
        const long n = integer(b, "n", 2);
        if(n < 1)
            throw ConfigError("ball.n must be positive");
        radii = Vec::Constant(n, num(b, "R", 1.0));
    } else {
        radii = vec(p, "radii", Vec::Constant(2, 1.0));
    }
    const EllipsoidSpec e(radii);
    const int n = static_cast<int>(e.radii.size());
    const double cap = ellipsoid_capacity(e);
    double vol = 1.0, fact = 1.0;
    for(int j = 0; j < n; ++j) {
        vol *= kPi * e.radii(j) * e.radii(j) / (j + 1);
        fact *= j + 1;
    }
    const double inscribed = ball_volume(n, e.radii(0));
    const double from_capacity = std::pow(cap, n) / fact;
    r.summary = {{"n", n},
                 {"sorted_radii", vec_json(e.radii)},
                 {"capacity", cap},
                 {"volume", vol},
                 {"inscribed_ball_volume", inscribed},
                 {"volume_from_capacity", from_capacity},
                 {"ball_volume_consistent", std::abs(inscribed - from_capacity) <= tol * inscribed},
                 {"cylinder_capacity", cylinder_capacity(e.radii(0))}};
    return r;
}

// Non-squeezing ------------------------------------------------------------

SymplectomorphismSpec to_map(const json& stages, int n)
{
    if(!stages.is_array())
        throw ConfigError("'stages' must be an array");
    SymplectomorphismSpec f;
    f.n = n;
    for(const auto& s : stages) {
        if(!s.is_object() || !s.contains("type") || !s.at("type").is_string())
            throw ConfigError("each stage needs a 'type'");
        const std::string type = s.at("type").get<std::string>();
        if(type == "linear") {
            if(!s.contains("S"))
                throw ConfigError("linear stage needs 'S'");
            f.stages.emplace_back(LinearStage{to_mat(s.at("S"), "S")});
        } else if(type == "x_shear" || type == "p_shear") {
            if(!s.contains("polynomial"))
                throw ConfigError("shear stage needs 'polynomial'");
            Polynomial P = to_poly(s.at("polynomial"), "polynomial");
            if(type == "x_shear")
                f.stages.emplace_back(XShearStage{std::move(P)});
            else
                f.stages.emplace_back(PShearStage{std::move(P)});
        } else {
            throw ConfigError("stage type must be linear|x_shear|p_shear");
        }
    }
    f.validate();
    return f;
}

Result run_nonsqueeze(json& p, std::uint64_t seed, double margin)
{
    Result r;
    const int n = static_cast<int>(integer(p, "n", 2));
    const double R = num(p, "R", 1.0);
    if(n < 1 || !(R > 0.0))
        throw ConfigError("need n >= 1 and R > 0");
    ShadowOptions opt;
    opt.grid_res = static_cast<int>(integer(p, "grid_res", 512));
    opt.samples = integer(p, "samples", 1000000);
    opt.fill_holes = boolean(p, "fill_holes", true);
    const std::string sampling = str(p, "sampling", "automatic", {"automatic", "volume", "boundary"});
    opt.sampling = sampling == "volume"     ? BallSampling::volume
                   : sampling == "boundary" ? BallSampling::boundary
                                            : BallSampling::automatic;
    if(opt.grid_res < 1 || opt.samples < 1)
        throw ConfigError("grid_res and samples must be positive");

    std::vector<SymplectomorphismSpec> maps;
    std::vector<std::uint64_t> map_seeds;
    if(p.contains("stages")) {
        maps.push_back(to_map(p["stages"], n));
        map_seeds.push_back(seed);
    } else {
        const long count = integer(p, "random_maps", 1);
        if(count < 1)
            throw ConfigError("random_maps must be positive");
        for(long k = 0; k < count; ++k) {
            map_seeds.push_back(seed + static_cast<std::uint64_t>(k));
            maps.push_back(random_symplectomorphism(n, map_seeds.back()));
        }
    }

    const double ref = kPi * R * R;
    r.table.columns = {"map", "map_seed", "plane_x", "plane_p", "conjugate", "area", "ratio", "occupied_cells"};
    double min_conj = std::numeric_limits<double>::infinity();
    double min_control = std::numeric_limits<double>::infinity();
    for(std::size_t k = 0; k < maps.size(); ++k) {
        opt.seed = map_seeds[k];
        for(const auto& est : shadow_areas(maps[k], R, opt)) {
            r.table.rows.push_back({static_cast<long>(k), map_seeds[k], est.plane_x, est.plane_p, est.conjugate(),
                                    est.area, est.area / ref, est.occupied_cells});
            if(est.conjugate())
                min_conj = std::min(min_conj, est.area);
            else
                min_control = std::min(min_control, est.area);
        }
    }
    r.summary = {{"maps", maps.size()},
                 {"reference_area", ref},
                 {"threshold", ref * (1.0 - margin)},
                 {"min_conjugate_area", min_conj},
                 {"min_conjugate_ratio", min_conj / ref},
                 {"min_control_area", n > 1 ? json(min_control) : json(nullptr)},
                 {"passed", min_conj >= ref * (1.0 - margin)}};
    return r;
}

// Quantization -------------------------------------------------------------

Result run_quantize(json& p, double tol)
{
    Result r;
    const std::string mode = str(p, "mode", "spectrum", {"torus", "ground", "spectrum"});
    const double hbar = num(p, "hbar", 1.0);
    if(!(hbar > 0.0))
        throw ConfigError("hbar must be positive");
    if(mode == "torus") {
        const TorusSpec t(vec(p, "radii", Vec::Constant(1, std::sqrt(hbar))));
        const KellerMaslovReport rep = keller_maslov_check(t, hbar, tol);
        r.table.columns = {"generator", "radius", "action", "maslov", "value", "residual", "passed"};
        for(const auto& row : rep.rows)
            r.table.rows.push_back(
                {row.generator, row.radius, row.action, row.maslov, row.value, row.residual, row.passed});
        r.summary = {{"passed", rep.passed}};
        if(p.contains("omegas")) {
            const Vec w = vec_req(p, "omegas");
            if(w.size() != t.circles())
                throw ConfigError("'omegas' needs one frequency per circle");
            r.summary["energy"] = rep.passed ? json(oscillator_levels(t, w, hbar, tol)) : json(nullptr);
        }
    } else if(mode == "ground") {
        const Vec w = vec(p, "omegas", Vec::Ones(1));
        r.summary = {{"ground_energy", ground_energy(w, hbar)}, {"minimal_orbit_action", minimal_orbit_action(hbar)}};
    } else {
        const long N = integer(p, "N_max", 2);
        const bool contrast = boolean(p, "contrast", false);
        if(N < 0)
            throw ConfigError("N_max must be non-negative");
        const auto levels = oscillator_spectrum_from_waveforms(hbar, static_cast<int>(N));
        std::vector<double> dens;
        if(contrast)
            dens = oscillator_spectrum_from_waveforms(hbar, static_cast<int>(N), SpectrumRule::density_only);
        r.table.columns = {"N", "energy", "expected"};
        if(contrast)
            r.table.columns.push_back("density_only_energy");
        for(long k = 0; k <= N; ++k) {
            std::vector<json> row{k, k < static_cast<long>(levels.size()) ? json(levels[k]) : json(nullptr),
                                  (k + 0.5) * hbar};
            if(contrast)
                row.push_back(k < static_cast<long>(dens.size()) ? json(dens[k]) : json(nullptr));
            r.table.rows.push_back(std::move(row));
        }
        double err = 0.0;
        for(std::size_t k = 0; k < levels.size(); ++k)
            err = std::max(err, std::abs(levels[k] - (k + 0.5) * hbar));
        r.summary = {{"levels", levels.size()}, {"max_error", err}};
    }
    return r;
}

// Evolution ----------------------------------------------------------------

PhasePoint to_point(json& p, int n)
{
    json& z = section(p, "z0");
    const Vec x = vec(z, "x", Vec::Constant(n, 1.0)), q = vec(z, "p", Vec::Zero(n));
    if(x.size() != n || q.size() != n)
        throw ConfigError("'z0' must match the hamiltonian dimension");
    return {x, q};
}

Result run_evolve(json& p, double tol)
{
    Result r;
    const std::string mode = str(p, "mode", "trajectory", {"trajectory", "waveform", "van_vleck", "morse"});
    if(!p.contains("hamiltonian"))
        p["hamiltonian"] = json::object();
    const HamiltonianSpec H = to_hamiltonian(p["hamiltonian"]);
    const int n = H.dim();
    const double t0 = num(p, "t0", 0.0), t1 = num(p, "t1", 1.0);

    if(mode == "trajectory") {
        const PhasePoint z0 = to_point(p, n);
        const long steps = integer(p, "steps", 1000);
        const long every = integer(p, "output_every", 10);
        if(steps < 1 || every < 1)
            throw ConfigError("steps and output_every must be positive");
        const Trajectory tr = integrate(H, z0, t0, t1, static_cast<int>(steps));
        r.table.columns = {"t", "x", "p", "action", "energy", "symplecticity_defect"};
        double defect = 0.0;
        for(std::size_t k = 0; k < tr.size(); ++k) {
            const double d = symplecticity_defect(tr.jacobians[k]);
            defect = std::max(defect, d);
            if(k % every == 0 || k + 1 == tr.size())
                r.table.rows.push_back({tr.times[k], vec_json(tr.points[k].x), vec_json(tr.points[k].p),
                                        tr.action[k], H.value(tr.points[k], tr.times[k]), d});
        }
        r.summary = {{"action", tr.action.back()},
                     {"end", {{"x", vec_json(tr.end().x)}, {"p", vec_json(tr.end().p)}}},
                     {"max_symplecticity_defect", defect}};
    } else if(mode == "morse") {
        const PhasePoint z0 = to_point(p, n);
        const MorseReport m = morse_report(H, z0.x, z0.p, t0, t1);
        r.summary = {{"morse_index", m.index}, {"sign_changes", m.sign_changes}, {"det_end", m.det_end}};
    } else if(mode == "waveform") {
        if(n != 1)
            throw ConfigError("waveform mode needs a one-dimensional hamiltonian");
        const double hbar = num(p, "hbar", 1.0);
        const double radius = num(p, "radius", std::sqrt(hbar));
        const long labels = integer(p, "labels", 512);
        const long steps = integer(p, "steps", 64);
        if(!(hbar > 0.0) || !(radius > 0.0) || labels < 2 || steps < 1)
            throw ConfigError("need hbar > 0, radius > 0, labels >= 2, steps >= 1");
        const Vec xs = grid(p, -1.2 * radius, 1.2 * radius, 121);
        const Waveform W = Waveform::make(TorusSpec(Vec::Constant(1, radius)), hbar);
        const WaveformSnapshot s0 = sample_waveform(W, circle_labels(0.0, 2.0 * kPi, static_cast<int>(labels)), t0);
        const WaveformSnapshot st = evolve(s0, H, t1, static_cast<int>(steps));
        const Shadow sh = shadow(st, xs, 2.0 * kPi);
        r.table.columns = {"x", "value", "branches", "caustic"};
        for(Eigen::Index i = 0; i < xs.size(); ++i)
            r.table.rows.push_back({xs(i), cplx_json(sh.values(i)), sh.branch_count[i], bool(sh.caustic[i])});
        json field = json::array();
        for(const auto& s : st.samples)
            field.push_back({{"theta", s.label.coords(0)}, {"index", s.index}, {"phase", s.phase}});
        r.summary = {{"quantized", is_quantized(W.manifold, hbar)},
                     {"mass_initial", total_mass(s0, 2.0 * kPi)},
                     {"mass_final", total_mass(st, 2.0 * kPi)},
                     {"index_field", field}};
    } else {
        if(n != 1 || !H.is_quadratic())
            throw ConfigError("van_vleck mode needs a one-dimensional quadratic hamiltonian");
        json& g = section(p, "packet");
        const GaussianPacket gp{num(g, "x0", 0.0), num(g, "p0", 0.0), num(g, "sigma", 1.0)};
        const double hbar = num(p, "hbar", 1.0);
        if(!(hbar > 0.0) || !(gp.sigma > 0.0))
            throw ConfigError("hbar and sigma must be positive");
        const Vec xs = grid(p, -8.0, 8.0, 1024);
        const std::string which = str(p, "oracle", "none", {"none", "mehler", "free"});
        const CVec psi = van_vleck_gaussian(gp, H, hbar, t0, t1, xs);
        std::optional<CVec> ref;
        if(which == "mehler") {
            if(H.kind() != HamiltonianKind::harmonic)
                throw ConfigError("the mehler oracle needs a harmonic hamiltonian");
            ref = oracle::mehler_gaussian(gp.x0, gp.p0, gp.sigma, H.omega()(0), H.mass()(0), hbar, t1 - t0, xs);
        } else if(which == "free") {
            if(H.kind() != HamiltonianKind::free)
                throw ConfigError("the free oracle needs a free-particle hamiltonian");
            ref = oracle::free_gaussian(gp.x0, gp.p0, gp.sigma, H.mass()(0), hbar, t1 - t0, xs);
        }
        r.table.columns = {"x", "psi"};
        if(ref)
            r.table.columns.insert(r.table.columns.end(), {"oracle", "abs_error"});
        for(Eigen::Index i = 0; i < xs.size(); ++i) {
            std::vector<json> row{xs(i), cplx_json(psi(i))};
            if(ref) {
                row.push_back(cplx_json((*ref)(i)));
                row.push_back(std::abs(psi(i) - (*ref)(i)));
            }
            r.table.rows.push_back(std::move(row));
        }
        if(ref) {
            const double rel = (psi - *ref).norm() / ref->norm();
            r.summary = {{"oracle", which}, {"relative_l2_error", rel}, {"passed", rel <= tol}};
        }
    }
    return r;
}

// Output -------------------------------------------------------------------

std::string csv_cell(const json& v)
{
    if(v.is_string()) {
        const std::string s = v.get<std::string>();
        if(s.find_first_of(",\"\n") == std::string::npos)
            return s;
        std::string q = "\"";
        for(char c : s)
            q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    if(v.is_null())
        return "";
    return v.dump();
}

void write_csv(std::ostream& os, const Table& t)
{
    if(t.columns.empty())
        return;
    std::vector<std::string> header;
    for(std::size_t c = 0; c < t.columns.size(); ++c) {
        const json& probe = t.rows.empty() ? json() : t.rows.front()[c];
        if(probe.is_object()) {
            header.push_back(t.columns[c] + "_re");
            header.push_back(t.columns[c] + "_im");
        } else if(probe.is_array()) {
            for(std::size_t k = 1; k <= probe.size(); ++k)
                header.push_back(t.columns[c] + "_" + std::to_string(k));
        } else {
            header.push_back(t.columns[c]);
        }
    }
    for(std::size_t k = 0; k < header.size(); ++k)
        os << (k ? "," : "") << header[k];
    os << "\n";
    for(const auto& row : t.rows) {
        bool first = true;
        auto emit = [&](const json& v) {
            os << (first ? "" : ",") << csv_cell(v);
            first = false;
        };
        for(const auto& v : row) {
            if(v.is_object()) {
                emit(v.at("re"));
                emit(v.at("im"));
            } else if(v.is_array()) {
                for(const auto& e : v)
                    emit(e);
            } else {
                emit(v);
            }
        }
        os << "\n";
    }
}

json table_json(const Table& t)
{
    json rows = json::array();
    for(const auto& row : t.rows) {
        json o = json::object();
        for(std::size_t c = 0; c < t.columns.size(); ++c)
            o[t.columns[c]] = row[c];
        rows.push_back(std::move(o));
    }
    return rows;
}

void diagnostic(std::ostream& err, const std::string& kind, const std::string& msg, const json& extra = {})
{
    json d = {{"error", kind}, {"message", msg}};
    if(extra.is_object())
        d.update(extra);
    err << d.dump() << "\n";
}

double default_tol(const std::string& cmd)
{
    if(cmd == "index")
        return kSpectralTol;
    if(cmd == "capacity")
        return 1e-12;
    if(cmd == "nonsqueeze")
        return 0.05;
    if(cmd == "quantize")
        return 1e-8;
    return 1e-6;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Symplectic geometry experiments: Leray indices, capacities, quantization, waveforms"};
    app.set_version_flag("--version", kVersion);
    std::string config_path, out_path, format = "json";
    std::optional<long long> seed_opt;
    std::optional<double> tol_opt;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed_opt, "Random seed (default 0)");
    app.add_option("--out", out_path, "Write results here instead of stdout");
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--tol", tol_opt, "Tolerance override");
    app.fallthrough();
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"index", "Leray, loop and argument indices"},
        {"capacity", "Capacities and volumes of ellipsoids"},
        {"nonsqueeze", "Shadow areas of mapped balls"},
        {"quantize", "Quantization conditions and energy levels"},
        {"evolve", "Trajectories, waveform transport, Van Vleck propagation, Morse indices"}};
    for(const auto& [name, desc] : commands)
        app.add_subcommand(name, desc);
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch(const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch(const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kOk;
    } catch(const CLI::ParseError& e) {
        diagnostic(err, "config", e.what());
        return kConfigError;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    const auto start = std::chrono::steady_clock::now();
    json config;
    try {
        json file = json::object();
        if(!config_path.empty()) {
            std::ifstream in(config_path);
            if(!in)
                throw ConfigError("cannot open config file " + config_path);
            file = json::parse(in);
            if(!file.is_object())
                throw ConfigError("config must be a JSON object");
        }
        if(file.contains("command") && file["command"] != cmd)
            throw ConfigError("config is for command '" + file["command"].dump() + "'");
        json params = file.contains("params") ? file["params"] : json::object();
        if(!params.is_object())
            throw ConfigError("'params' must be an object");
        std::uint64_t seed = 0;
        if(seed_opt) {
            if(*seed_opt < 0)
                throw ConfigError("seed must be non-negative");
            seed = static_cast<std::uint64_t>(*seed_opt);
        } else if(file.contains("seed")) {
            if(!file["seed"].is_number_unsigned())
                throw ConfigError("'seed' must be a non-negative integer");
            seed = file["seed"].get<std::uint64_t>();
        }
        double tol = default_tol(cmd);
        if(tol_opt)
            tol = *tol_opt;
        else if(file.contains("tol"))
            tol = num(file, "tol", tol);
        if(!(tol >= 0.0))
            throw ConfigError("tol must be non-negative");

        Result res;
        if(cmd == "index")
            res = run_index(params, seed, tol);
        else if(cmd == "capacity")
            res = run_capacity(params, tol);
        else if(cmd == "nonsqueeze")
            res = run_nonsqueeze(params, seed, tol);
        else if(cmd == "quantize")
            res = run_quantize(params, tol);
        else
            res = run_evolve(params, tol);

        config = {{"command", cmd}, {"params", params}, {"seed", seed}, {"tol", tol}, {"format", format}};
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        std::ofstream file_out;
        std::ostream* os = &out;
        if(!out_path.empty()) {
            file_out.open(out_path);
            if(!file_out)
                throw ConfigError("cannot write " + out_path);
            os = &file_out;
        }
        if(format == "csv") {
            if(res.table.columns.empty()) {
                Table t;
                for(const auto& [k, v] : res.summary.items())
                    t.columns.push_back(k);
                std::vector<json> row;
                for(const auto& [k, v] : res.summary.items())
                    row.push_back(v.is_structured() ? json(v.dump()) : v);
                t.rows.push_back(std::move(row));
                write_csv(*os, t);
            } else {
                write_csv(*os, res.table);
            }
        } else {
            json results = res.summary;
            if(!res.table.columns.empty())
                results["table"] = table_json(res.table);
            const json env = {{"config", config}, {"results", results}, {"version", kVersion}, {"duration", secs}};
            *os << env.dump(2) << "\n";
        }
        return kOk;
    } catch(const ConfigError& e) {
        diagnostic(err, "config", e.what());
        return kConfigError;
    } catch(const json::exception& e) {
        diagnostic(err, "config", e.what());
        return kConfigError;
    } catch(const std::invalid_argument& e) {
        diagnostic(err, "config", e.what());
        return kConfigError;
    } catch(const DivergenceError& e) {
        diagnostic(err, "numerical", e.what(), json{{"last_valid_time", e.last_valid_time()}});
        return kNumericalError;
    } catch(const NumericalError& e) {
        diagnostic(err, "numerical", e.what());
        return kNumericalError;
    }
}

} // namespace camel::cli
