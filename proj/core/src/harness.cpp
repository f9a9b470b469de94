#include "evostab/harness.hpp"

#include "evostab/builtins.hpp"
#include "evostab/errors.hpp"
#include "evostab/expression.hpp"
#include "evostab/extension.hpp"
#include "evostab/parallel.hpp"
#include "evostab/stability.hpp"
#include "evostab/transport.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

namespace evostab {

namespace {

using json = nlohmann::json;

std::string num(double v) { return fmt::format("{:.17g}", v); }
std::string flag(bool b) { return b ? "true" : "false"; }

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) { return fmt::format("{}[{}]", path, i); }

class Checker {
public:
    void fail(const std::string& path, const std::string& msg) {
        errors_.push_back(fmt::format("{}: {}", path, msg));
    }
    void raise() const {
        if (!errors_.empty()) throw ValidationError(errors_);
    }
    bool clean_since(std::size_t mark) const { return errors_.size() == mark; }
    std::size_t mark() const { return errors_.size(); }

private:
    std::vector<std::string> errors_;
};

struct Tolerances {
    double solver = 1e-10;
    double quadrature = 1e-9;
};

struct Context {
    std::uint64_t seed = 0;
    Tolerances tols;
    Checker* check = nullptr;

    SolverOptions solver() const {
        SolverOptions o;
        o.rtol = tols.solver;
        o.atol = tols.solver;
        return o;
    }
    QuadratureOptions quadrature() const {
        QuadratureOptions q;
        q.abs_tol = tols.quadrature;
        return q;
    }
};

using Runner = std::function<void(Report&)>;

// ---- primitive fields -----------------------------------------------------

const json* field(Checker& c, const json& obj, const std::string& path, const char* key,
                  bool required) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) c.fail(join(path, key), "missing");
        return nullptr;
    }
    return &*it;
}

std::optional<double> as_number(Checker& c, const json& v, const std::string& path) {
    if (!v.is_number()) {
        c.fail(path, "expected a number");
        return std::nullopt;
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        c.fail(path, "expected a finite number");
        return std::nullopt;
    }
    return d;
}

std::optional<double> number(Checker& c, const json& obj, const std::string& path,
                             const char* key, std::optional<double> fallback = std::nullopt) {
    const json* v = field(c, obj, path, key, !fallback.has_value());
    if (!v) return fallback;
    return as_number(c, *v, join(path, key));
}

std::optional<std::vector<double>> number_list(Checker& c, const json& v, const std::string& path,
                                               bool nonempty = true) {
    if (!v.is_array() || (nonempty && v.empty())) {
        c.fail(path, nonempty ? "expected a nonempty array of numbers" : "expected an array");
        return std::nullopt;
    }
    std::vector<double> out;
    const auto m = c.mark();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (auto d = as_number(c, v[i], index(path, i))) out.push_back(*d);
    }
    if (!c.clean_since(m)) return std::nullopt;
    return out;
}

std::optional<Interval> interval(Checker& c, const json& obj, const std::string& path,
                                 const char* key, bool required = true) {
    const json* v = field(c, obj, path, key, required);
    if (!v) return std::nullopt;
    const std::string p = join(path, key);
    auto xs = number_list(c, *v, p);
    if (!xs) return std::nullopt;
    if (xs->size() != 2 || !((*xs)[0] < (*xs)[1])) {
        c.fail(p, "expected [lo, hi] with lo < hi");
        return std::nullopt;
    }
    return Interval((*xs)[0], (*xs)[1]);
}

NormKind norm(Checker& c, const json& obj, const std::string& path) {
    const json* v = field(c, obj, path, "norm", false);
    if (!v) return NormKind::euclidean;
    if (!v->is_string()) {
        c.fail(join(path, "norm"), "expected one of euclidean, one-norm, inf-norm");
        return NormKind::euclidean;
    }
    try {
        return parse_norm_kind(v->get<std::string>());
    } catch (const ValidationError&) {
        c.fail(join(path, "norm"),
               fmt::format("unknown norm '{}'; expected euclidean, one-norm or inf-norm",
                           v->get<std::string>()));
        return NormKind::euclidean;
    }
}

std::optional<std::string> builtin_name(const json& v) {
    if (v.is_object() && v.contains("builtin") && v["builtin"].is_string()) {
        return v["builtin"].get<std::string>();
    }
    return std::nullopt;
}

// ---- expressions ----------------------------------------------------------

std::optional<Expression> expression(Checker& c, const json& v, const std::string& path,
                                     const std::vector<std::string>& vars) {
    std::string src;
    if (v.is_number()) {
        src = num(v.get<double>());
    } else if (v.is_string()) {
        src = v.get<std::string>();
    } else {
        c.fail(path, "expected an expression string or a number");
        return std::nullopt;
    }
    try {
        return Expression::parse(src, vars);
    } catch (const ValidationError& e) {
        for (const auto& f : e.fields()) c.fail(path, f);
        return std::nullopt;
    }
}

using ExprMatrix = std::vector<std::vector<Expression>>;

std::optional<ExprMatrix> expression_matrix(Checker& c, const json& v, const std::string& path,
                                            const std::vector<std::string>& vars) {
    if (!v.is_array() || v.empty()) {
        c.fail(path, "expected a nonempty square array of expressions");
        return std::nullopt;
    }
    const std::size_t r = v.size();
    ExprMatrix out;
    const auto m = c.mark();
    for (std::size_t i = 0; i < r; ++i) {
        const std::string p = index(path, i);
        if (!v[i].is_array() || v[i].size() != r) {
            c.fail(p, fmt::format("expected a row of {} entries", r));
            continue;
        }
        std::vector<Expression> row;
        for (std::size_t j = 0; j < r; ++j) {
            if (auto e = expression(c, v[i][j], index(p, j), vars)) row.push_back(*e);
        }
        out.push_back(std::move(row));
    }
    if (!c.clean_since(m)) return std::nullopt;
    return out;
}

std::function<Matrix(double, double)> matrix_fn(ExprMatrix m) {
    return [m = std::move(m)](double a, double b) -> Matrix {
        const auto r = static_cast<int>(m.size());
        Matrix out(r, r);
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < r; ++j) out(i, j) = m[i][j](a, b);
        }
        return out;
    };
}

std::function<Matrix(double)> matrix_fn1(ExprMatrix m) {
    return [m = std::move(m)](double a) -> Matrix {
        const auto r = static_cast<int>(m.size());
        Matrix out(r, r);
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < r; ++j) out(i, j) = m[i][j](a);
        }
        return out;
    };
}

std::optional<std::vector<double>> breakpoints(Checker& c, const json& obj,
                                               const std::string& path, const char* key) {
    const json* v = field(c, obj, path, key, false);
    if (!v) return std::vector<double>{};
    auto xs = number_list(c, *v, join(path, key), false);
    if (xs) std::sort(xs->begin(), xs->end());
    return xs;
}

// ---- scalar paths ---------------------------------------------------------

std::optional<ScalarPath> scalar_path(Checker& c, const json& v, const std::string& path,
                                      const std::string& var) {
    if (v.is_string() || v.is_number()) {
        auto e = expression(c, v, path, {var});
        if (!e) return std::nullopt;
        return ScalarPath([e = *e](double t) { return e(t); }, std::nullopt, {});
    }
    if (!v.is_object()) {
        c.fail(path, "expected an expression or an object");
        return std::nullopt;
    }
    if (auto name = builtin_name(v)) {
        const auto m = c.mark();
        if (*name == "sin") {
            const auto w = number(c, v, path, "frequency", 1.0);
            if (!c.clean_since(m)) return std::nullopt;
            return builtins::sine(*w);
        }
        if (*name == "sin-squared") return builtins::sine_squared();
        if (*name == "sawtooth") {
            const auto period = number(c, v, path, "period", 2.0);
            const auto amp = number(c, v, path, "amplitude", 1.0);
            const auto horizon = number(c, v, path, "horizon", 1000.0);
            if (!c.clean_since(m)) return std::nullopt;
            if (!(*period > 0.0)) {
                c.fail(join(path, "period"), "must be positive");
                return std::nullopt;
            }
            return builtins::sawtooth(*period, *amp, *horizon);
        }
        if (*name == "constant") {
            const auto value = number(c, v, path, "value", 0.0);
            if (!c.clean_since(m)) return std::nullopt;
            return ScalarPath::constant(*value);
        }
        if (*name == "identity") return ScalarPath::identity();
        c.fail(join(path, "builtin"),
               fmt::format("unknown path '{}'; expected sin, sin-squared, sawtooth, constant or "
                           "identity",
                           *name));
        return std::nullopt;
    }
    const auto m = c.mark();
    const json* src = field(c, v, path, "expr", true);
    std::optional<Expression> e;
    if (src) e = expression(c, *src, join(path, "expr"), {var});
    std::optional<Expression> d;
    if (const json* dv = field(c, v, path, "deriv", false)) {
        d = expression(c, *dv, join(path, "deriv"), {var});
    }
    auto bps = breakpoints(c, v, path, "breakpoints");
    if (!c.clean_since(m)) return std::nullopt;
    std::optional<ScalarPath::Fn> deriv;
    if (d) deriv = [d = *d](double t) { return d(t); };
    return ScalarPath([e = *e](double t) { return e(t); }, deriv, *bps);
}

// ---- systems --------------------------------------------------------------

std::optional<SeparableSystem> system(Checker& c, const json& v, const std::string& path,
                                      const Interval& window) {
    if (!v.is_object()) {
        c.fail(path, "expected an object");
        return std::nullopt;
    }
    const auto m = c.mark();
    const NormKind nk = norm(c, v, path);
    std::optional<ScalarPath> f;
    if (const json* fv = field(c, v, path, "f", false)) f = scalar_path(c, *fv, join(path, "f"), "t");

    std::optional<SeparableSystem> sys;
    if (auto name = builtin_name(v)) {
        if (*name == "intro-cos") {
            sys = builtins::intro_cos(window.hi);
            if (f) sys->f = *f;
        } else if (*name == "example39") {
            if (window.lo < 0.0) c.fail(path, "example39 is defined for t >= 0 only");
            sys = builtins::example39(nk, f ? *f : builtins::sine(), window.hi);
        } else if (*name == "rotation" || *name == "constant") {
            auto J = interval(c, v, path, "J", false);
            OperatorField G = builtins::rotation_field();
            if (*name == "constant") {
                const json* mv = field(c, v, path, "matrix", true);
                std::optional<ExprMatrix> em;
                if (mv) em = expression_matrix(c, *mv, join(path, "matrix"), {"t", "u"});
                if (em) G = builtins::constant_field(matrix_fn(*em)(0.0, 0.0));
            }
            if (!c.clean_since(m)) return std::nullopt;
            sys = SeparableSystem{G, f ? *f : builtins::sine(), window,
                                  J ? *J : Interval(-1.0, 1.0), VectorSpace(G.dim(), nk)};
        } else {
            c.fail(join(path, "builtin"),
                   fmt::format("unknown system '{}'; expected intro-cos, example39, rotation or "
                               "constant",
                               *name));
            return std::nullopt;
        }
    } else {
        const json* gv = field(c, v, path, "G", true);
        std::optional<ExprMatrix> g;
        if (gv) g = expression_matrix(c, *gv, join(path, "G"), {"t", "u"});
        std::optional<ExprMatrix> pt;
        if (const json* pv = field(c, v, path, "partial_t", false)) {
            pt = expression_matrix(c, *pv, join(path, "partial_t"), {"t", "u"});
            if (pt && g && pt->size() != g->size()) {
                c.fail(join(path, "partial_t"), "size differs from G");
            }
        }
        auto J = interval(c, v, path, "J");
        auto bps = breakpoints(c, v, path, "t_breakpoints");
        if (!f) c.fail(join(path, "f"), "missing");
        if (!c.clean_since(m)) return std::nullopt;
        bool u_free = true;
        for (const auto& row : *g) {
            for (const auto& e : row) u_free = u_free && !e.uses("u");
        }
        const auto r = static_cast<int>(g->size());
        std::optional<OperatorField::Fn> partial;
        if (pt) partial = matrix_fn(*pt);
        OperatorField G(r, matrix_fn(*g), partial, *bps);
        G.set_u_independent(u_free);
        sys = SeparableSystem{G, *f, window, *J, VectorSpace(r, nk)};
    }
    if (!c.clean_since(m) || !sys) return std::nullopt;
    sys->I = window;

    constexpr int probes = 1000;
    for (int i = 0; i <= probes; ++i) {
        const double t = window.lo + window.length() * i / probes;
        const double u = sys->f(t);
        if (!(u >= sys->J.lo && u <= sys->J.hi)) {
            c.fail(join(path, "f"), fmt::format("f({}) = {} leaves J = [{}, {}]", t, u, sys->J.lo,
                                                sys->J.hi));
            return std::nullopt;
        }
    }
    return sys;
}

std::optional<CoefficientPath> coefficient(Checker& c, const json& v, const std::string& path,
                                           const Interval& window) {
    if (!v.is_object()) {
        c.fail(path, "expected an object");
        return std::nullopt;
    }
    const auto m = c.mark();
    if (auto name = builtin_name(v)) {
        if (*name != "zero") {
            c.fail(join(path, "builtin"), fmt::format("unknown coefficient '{}'; expected zero",
                                                      *name));
            return std::nullopt;
        }
        const auto dim = number(c, v, path, "dim", 1.0);
        const NormKind nk = norm(c, v, path);
        if (!c.clean_since(m)) return std::nullopt;
        if (*dim < 1 || *dim != std::floor(*dim)) {
            c.fail(join(path, "dim"), "expected a positive integer");
            return std::nullopt;
        }
        return CoefficientPath::zero(VectorSpace(static_cast<int>(*dim), nk), window);
    }
    if (const json* sv = field(c, v, path, "system", false)) {
        auto sys = system(c, *sv, join(path, "system"), window);
        if (!sys) return std::nullopt;
        auto A = assemble_A(*sys);
        A.domain = window;
        return A;
    }
    const json* ev = field(c, v, path, "entries", true);
    std::optional<ExprMatrix> e;
    if (ev) e = expression_matrix(c, *ev, join(path, "entries"), {"t"});
    const NormKind nk = norm(c, v, path);
    auto bps = breakpoints(c, v, path, "breakpoints");
    if (!c.clean_since(m)) return std::nullopt;
    const auto r = static_cast<int>(e->size());
    return CoefficientPath{matrix_fn1(*e), *bps, window, VectorSpace(r, nk)};
}

// ---- connections and curves -----------------------------------------------

struct ParsedConnection {
    ConnectionForm w;
    bool flat = false;
};

std::optional<Rectangle> rectangle(Checker& c, const json& v, const std::string& path) {
    const json* d = field(c, v, path, "domain", true);
    if (!d) return std::nullopt;
    const std::string p = join(path, "domain");
    if (!d->is_array() || d->size() != 2) {
        c.fail(p, "expected [[x_lo, x_hi], [u_lo, u_hi]]");
        return std::nullopt;
    }
    const auto m = c.mark();
    auto x = number_list(c, (*d)[0], index(p, 0));
    auto u = number_list(c, (*d)[1], index(p, 1));
    if (!c.clean_since(m)) return std::nullopt;
    if (x->size() != 2 || u->size() != 2 || !((*x)[0] < (*x)[1]) || !((*u)[0] < (*u)[1])) {
        c.fail(p, "expected [[x_lo, x_hi], [u_lo, u_hi]] with lo < hi");
        return std::nullopt;
    }
    return Rectangle{Interval((*x)[0], (*x)[1]), Interval((*u)[0], (*u)[1])};
}

std::optional<ParsedConnection> connection(Checker& c, const json& v, const std::string& path) {
    if (!v.is_object()) {
        c.fail(path, "expected an object");
        return std::nullopt;
    }
    const auto m = c.mark();
    const NormKind nk = norm(c, v, path);
    auto rect = rectangle(c, v, path);
    if (auto name = builtin_name(v)) {
        if (*name == "zero") {
            const auto dim = number(c, v, path, "dim", 1.0);
            if (!c.clean_since(m)) return std::nullopt;
            return ParsedConnection{
                ConnectionForm::zero(VectorSpace(static_cast<int>(*dim), nk), *rect), true};
        }
        if (*name == "smooth") {
            const auto seed = number(c, v, path, "seed", 1.0);
            const auto scale = number(c, v, path, "scale", 0.02);
            const auto dim = number(c, v, path, "dim", 2.0);
            if (!c.clean_since(m)) return std::nullopt;
            if (*dim < 1 || *seed < 0) {
                c.fail(path, "dim must be >= 1 and seed >= 0");
                return std::nullopt;
            }
            return ParsedConnection{
                builtins::smooth_connection(static_cast<std::uint64_t>(*seed), *scale,
                                            VectorSpace(static_cast<int>(*dim), nk), *rect),
                false};
        }
        if (*name == "gauge-rotation") {
            const auto k = number(c, v, path, "k", 1.0);
            if (!c.clean_since(m)) return std::nullopt;
            return ParsedConnection{builtins::gauge_rotation(*rect, nk, *k), true};
        }
        if (*name == "gauge-shear") {
            if (!c.clean_since(m)) return std::nullopt;
            return ParsedConnection{builtins::gauge_shear(*rect, nk), true};
        }
        c.fail(join(path, "builtin"),
               fmt::format("unknown connection '{}'; expected zero, smooth, gauge-rotation or "
                           "gauge-shear",
                           *name));
        return std::nullopt;
    }
    const std::vector<std::string> vars = {"x", "u"};
    const json* o1 = field(c, v, path, "omega1", true);
    const json* o2 = field(c, v, path, "omega2", true);
    std::optional<ExprMatrix> e1, e2, e12;
    if (o1) e1 = expression_matrix(c, *o1, join(path, "omega1"), vars);
    if (o2) e2 = expression_matrix(c, *o2, join(path, "omega2"), vars);
    if (const json* d = field(c, v, path, "d1_omega2", false)) {
        e12 = expression_matrix(c, *d, join(path, "d1_omega2"), vars);
    }
    bool flat = false;
    if (const json* fl = field(c, v, path, "flat", false)) {
        if (!fl->is_boolean()) c.fail(join(path, "flat"), "expected a boolean");
        else flat = fl->get<bool>();
    }
    if (!c.clean_since(m)) return std::nullopt;
    if (e1->size() != e2->size() || (e12 && e12->size() != e1->size())) {
        c.fail(path, "omega1, omega2 and d1_omega2 must have the same size");
        return std::nullopt;
    }
    ConnectionForm w;
    w.omega1 = matrix_fn(*e1);
    w.omega2 = matrix_fn(*e2);
    if (e12) w.d1_omega2 = matrix_fn(*e12);
    w.domain = *rect;
    w.space = VectorSpace(static_cast<int>(e1->size()), nk);
    return ParsedConnection{std::move(w), flat};
}

std::optional<Curve> curve(Checker& c, const json& v, const std::string& path) {
    if (!v.is_object()) {
        c.fail(path, "expected an object");
        return std::nullopt;
    }
    if (const json* s = field(c, v, path, "segment", false)) {
        auto xs = number_list(c, *s, join(path, "segment"));
        if (!xs) return std::nullopt;
        if (xs->size() != 4) {
            c.fail(join(path, "segment"), "expected [x0, u0, x1, u1]");
            return std::nullopt;
        }
        return Curve::segment((*xs)[0], (*xs)[1], (*xs)[2], (*xs)[3]);
    }
    const auto m = c.mark();
    const json* g1 = field(c, v, path, "gamma1", true);
    const json* g2 = field(c, v, path, "gamma2", true);
    std::optional<ScalarPath> p1, p2;
    if (g1) p1 = scalar_path(c, *g1, join(path, "gamma1"), "t");
    if (g2) p2 = scalar_path(c, *g2, join(path, "gamma2"), "t");
    auto iv = interval(c, v, path, "interval");
    if (!c.clean_since(m)) return std::nullopt;
    return Curve{*p1, *p2, iv->lo, iv->hi};
}

std::optional<ConnectionBounds> bounds(Checker& c, const json& obj, const std::string& path) {
    const json* v = field(c, obj, path, "bounds", false);
    if (!v) return std::nullopt;
    const std::string p = join(path, "bounds");
    if (!v->is_object()) {
        c.fail(p, "expected an object with B1, B2, B12, lambda_J");
        return std::nullopt;
    }
    const auto m = c.mark();
    ConnectionBounds b;
    const auto b1 = number(c, *v, p, "B1");
    const auto b2 = number(c, *v, p, "B2");
    const auto b12 = number(c, *v, p, "B12");
    const auto lj = number(c, *v, p, "lambda_J");
    if (!c.clean_since(m)) return std::nullopt;
    if (*b1 < 0 || *b2 < 0 || *b12 < 0 || !(*lj > 0)) {
        c.fail(p, "bounds must be nonnegative and lambda_J positive");
        return std::nullopt;
    }
    b.B1 = *b1;
    b.B2 = *b2;
    b.B12 = *b12;
    b.lambda_J = *lj;
    b.provenance = BoundsProvenance::user_supplied;
    return b;
}

json bounds_json(const ConnectionBounds& b) {
    return {{"B1", b.B1},
            {"B2", b.B2},
            {"B12", b.B12},
            {"lambda_J", b.lambda_J},
            {"provenance",
             b.provenance == BoundsProvenance::user_supplied ? "user-supplied" : "grid-sampled"},
            {"resolution", b.resolution},
            {"converged", b.converged}};
}

// ---- pairs ----------------------------------------------------------------

using Pairs = std::vector<std::pair<double, double>>;

std::optional<Pairs> pairs(Checker& c, const json& obj, const std::string& path,
                           const std::optional<Interval>& window, std::uint64_t seed,
                           bool ordered, std::optional<std::size_t> fallback) {
    const json* v = field(c, obj, path, "pairs", !fallback.has_value());
    const std::string p = join(path, "pairs");
    if (!v || v->is_number_integer()) {
        std::size_t n = fallback.value_or(0);
        if (v) {
            if (v->get<long long>() < 0) {
                c.fail(p, "expected a nonnegative count");
                return std::nullopt;
            }
            n = static_cast<std::size_t>(v->get<long long>());
        }
        if (!window) {
            c.fail(p, "random pairs need a window");
            return std::nullopt;
        }
        return sample_pairs(*window, n, seed);
    }
    if (!v->is_array()) {
        c.fail(p, "expected a count or an array of [s, t]");
        return std::nullopt;
    }
    Pairs out;
    const auto m = c.mark();
    for (std::size_t i = 0; i < v->size(); ++i) {
        auto xs = number_list(c, (*v)[i], index(p, i));
        if (!xs) continue;
        if (xs->size() != 2) {
            c.fail(index(p, i), "expected [s, t]");
            continue;
        }
        const double s = (*xs)[0];
        const double t = (*xs)[1];
        if (ordered && !(s <= t)) c.fail(index(p, i), "expected s <= t");
        if (window && (!window->contains(s) || !window->contains(t))) {
            c.fail(index(p, i), "pair outside the window");
        }
        out.emplace_back(s, t);
    }
    if (!c.clean_since(m)) return std::nullopt;
    return out;
}

// ---- kinds ----------------------------------------------------------------

Runner parse_evolve(const json& p, const std::string& path, const Context& ctx) {
    Checker& c = *ctx.check;
    auto window = interval(c, p, path, "window");
    std::optional<CoefficientPath> A;
    if (window) {
        if (const json* cv = field(c, p, path, "coefficient", true)) {
            A = coefficient(c, *cv, join(path, "coefficient"), *window);
        }
    }
    auto ps = pairs(c, p, path, window, ctx.seed, false, 20);
    std::optional<ExprMatrix> closed;
    if (const json* cf = field(c, p, path, "closed_form", false)) {
        closed = expression_matrix(c, *cf, join(path, "closed_form"), {"t", "s"});
        if (closed && A && static_cast<int>(closed->size()) != A->space.dim) {
            c.fail(join(path, "closed_form"), "size differs from the coefficient");
        }
    }
    if (!A || !ps) return {};
    const double tol = ctx.tols.solver;
    const SolverOptions opts = ctx.solver();
    return [A = *A, ps = *ps, closed, tol, opts](Report& r) {
        struct Row {
            double nx, ni, inv, cf;
        };
        std::vector<Row> rows(ps.size());
        parallel_for(ps.size(), [&](std::size_t i) {
            const auto [s, t] = ps[i];
            const Operator X = evolve(A, s, t, opts);
            const Operator Xi = evolve(A, t, s, opts);
            Row row{op_norm(X), op_norm(Xi),
                    op_norm(Xi * X - Operator::identity(A.space)), 0.0};
            if (closed) row.cf = matrix_norm(X.matrix() - matrix_fn(*closed)(t, s), A.space.norm);
            rows[i] = row;
        });
        double worst_inv = 0.0, worst_cf = 0.0;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const Row& row = rows[i];
            const bool ok = row.inv <= 100.0 * tol && row.cf <= 100.0 * tol * std::max(1.0, row.nx);
            r.rows.push_back({num(ps[i].first), num(ps[i].second), num(row.nx), num(row.ni),
                              num(row.inv), closed ? num(row.cf) : "", flag(ok)});
            r.row_passed.push_back(ok);
            worst_inv = std::max(worst_inv, row.inv);
            worst_cf = std::max(worst_cf, row.cf);
        }
        r.summary["max_inverse_defect"] = worst_inv;
        if (closed) r.summary["max_closed_form_error"] = worst_cf;
        r.thresholds["inverse_defect"] = "<= 100 tol";
        r.thresholds["closed_form_error"] = "<= 100 tol max(1, norm_X)";
    };
}

std::optional<CertifyOptions> certify_options(Checker& c, const json& p, const std::string& path,
                                              const Context& ctx) {
    CertifyOptions o;
    o.quad_tol = ctx.tols.quadrature;
    if (field(c, p, path, "analytic_sup_l1", false)) {
        const auto v = number(c, p, path, "analytic_sup_l1");
        if (!v) return std::nullopt;
        if (*v < 0) {
            c.fail(join(path, "analytic_sup_l1"), "must be nonnegative");
            return std::nullopt;
        }
        o.analytic_sup_l1 = *v;
    }
    return o;
}

json certificate_json(const BoundCertificate& cert) {
    return {{"N", cert.N},
            {"V", cert.V},
            {"C", std::isfinite(cert.C) ? json(cert.C) : json("inf")},
            {"log_C", std::isfinite(cert.log_C) ? json(cert.log_C) : json("inf")},
            {"log_exponent", cert.log_exponent},
            {"v_lower", cert.v_lower},
            {"v_route", cert.v_route},
            {"window", {cert.window.lo, cert.window.hi}},
            {"sup_grid", cert.sup_grid},
            {"sup_argmax", cert.sup_argmax},
            {"sup_converged", cert.sup_converged},
            {"quad_tol", cert.quad_tol},
            {"status", cert.status == CertificateStatus::estimate ? "estimate"
                                                                   : "exact hypothesis"}};
}

Runner parse_certify(const json& p, const std::string& path, const Context& ctx) {
    Checker& c = *ctx.check;
    auto window = interval(c, p, path, "window");
    std::optional<SeparableSystem> sys;
    if (window) {
        if (const json* sv = field(c, p, path, "system", true)) {
            sys = system(c, *sv, join(path, "system"), *window);
        }
    }
    auto opts = certify_options(c, p, path, ctx);
    if (!sys || !opts) return {};
    return [sys = *sys, window = *window, opts = *opts](Report& r) {
        const BoundCertificate cert = certify(sys, window, opts);
        const bool c_ok = cert.log_C >= 2.0 * std::log(cert.N) - 1e-12;
        const bool v_ok = cert.V >= cert.v_lower * (1.0 - 1e-6) - 1e-9;
        const bool ok = c_ok && v_ok;
        r.rows.push_back({num(cert.N), num(cert.V), num(cert.C), num(cert.log_C),
                          num(cert.log_exponent), num(cert.v_lower),
                          std::to_string(cert.sup_grid), flag(cert.sup_converged),
                          cert.status == CertificateStatus::estimate ? "estimate"
                                                                      : "exact-hypothesis",
                          flag(ok)});
        r.row_passed.push_back(ok);
        r.summary["certificate"] = certificate_json(cert);
        r.thresholds["C"] = "C >= N^2";
        r.thresholds["V"] = "V >= partition-sum lower estimate (1 - 1e-6)";
    };
}

Runner parse_verify(const json& p, const std::string& path, const Context& ctx) {
    Checker& c = *ctx.check;
    auto window = interval(c, p, path, "window");
    std::optional<SeparableSystem> sys;
    if (window) {
        if (const json* sv = field(c, p, path, "system", true)) {
            sys = system(c, *sv, join(path, "system"), *window);
        }
    }
    auto opts = certify_options(c, p, path, ctx);
    auto ps = pairs(c, p, path, window, ctx.seed, true, 1000);
    if (!sys || !opts || !ps) return {};
    return [sys = *sys, window = *window, opts = *opts, ps = *ps,
            solver = ctx.solver()](Report& r) {
        const BoundCertificate cert = certify(sys, window, opts);
        const VerificationReport rep = verify_certificate(sys, cert, ps, solver);
        for (const auto& row : rep.rows) {
            r.rows.push_back({num(row.s), num(row.t), num(row.norm_X), num(row.norm_Xinv),
                              num(cert.C), num(row.ratio)});
            r.row_passed.push_back(row.passed);
        }
        r.summary["certificate"] = certificate_json(cert);
        r.summary["max_observed"] = rep.max_observed;
        r.summary["max_ratio"] = rep.max_ratio;
        r.summary["pairs"] = ps.size();
        r.thresholds["norm"] = "max(norm_X, norm_Xinv) <= C (1 + 1e-6)";
        if (rep.error) {
            r.error = *rep.error;
            r.passed = false;
        }
    };
}

Runner parse_substitution(const json& p, const std::string& path, const Context& ctx) {
    Checker& c = *ctx.check;
    const NormKind nk = norm(c, p, path);
    std::optional<ExprMatrix> B;
    if (const json* bv = field(c, p, path, "B", true)) {
        B = expression_matrix(c, *bv, join(path, "B"), {"u"});
    }
    std::optional<ScalarPath> f;
    if (const json* fv = field(c, p, path, "f", true)) f = scalar_path(c, *fv, join(path, "f"), "t");
    auto ps = pairs(c, p, path, std::nullopt, ctx.seed, false, std::nullopt);
    auto bps = breakpoints(c, p, path, "b_breakpoints");
    if (!B || !f || !ps || !bps) return {};
    const VectorSpace space(static_cast<int>(B->size()), nk);
    return [B = matrix_fn1(*B), f = *f, ps = *ps, bps = *bps, space,
            tol = ctx.tols.solver](Report& r) {
        std::vector<SubstitutionCheck> checks;
        checks.reserve(ps.size());
        for (std::size_t i = 0; i < ps.size(); ++i) {
            checks.push_back({Operator::identity(space), Operator::identity(space), 0.0, false});
        }
        parallel_for(ps.size(), [&](std::size_t i) {
            checks[i] = substitution_check(B, space, f, ps[i].first, ps[i].second, tol, bps);
        });
        double worst = 0.0;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            r.rows.push_back({num(ps[i].first), num(ps[i].second), num(checks[i].defect),
                              flag(checks[i].passed)});
            r.row_passed.push_back(checks[i].passed);
            worst = std::max(worst, checks[i].defect);
        }
        r.summary["max_defect"] = worst;
        r.thresholds["defect"] = "<= 100 tol";
    };
}

Runner parse_transport(const json& p, const std::string& path, const Context& ctx) {
    Checker& c = *ctx.check;
    std::optional<ParsedConnection> w;
    if (const json* cv = field(c, p, path, "connection", true)) {
        w = connection(c, *cv, join(path, "connection"));
    }
    std::vector<Curve> curves;
    if (const json* cv = field(c, p, path, "curves", true)) {
        if (!cv->is_array() || cv->empty()) {
            c.fail(join(path, "curves"), "expected a nonempty array of curves");
        } else {
            for (std::size_t i = 0; i < cv->size(); ++i) {
                if (auto g = curve(c, (*cv)[i], index(join(path, "curves"), i))) {
                    curves.push_back(*g);
                }
            }
        }
    }
    auto user_bounds = bounds(c, p, path);
    if (!w) return {};
    return [w = w->w, curves, user_bounds, solver = ctx.solver(),
            quad = ctx.quadrature()](Report& r) {
        const ConnectionBounds b = user_bounds ? *user_bounds : sample_connection_bounds(w);
        struct Row {
            double L = 0, beta = 0, norm = 0;
        };
        std::vector<Row> rows(curves.size());
        parallel_for(curves.size(), [&](std::size_t i) {
            const Curve& g = curves[i];
            Row row;
            row.L = arc_length(g.gamma1, g.a, g.b, quad);
            row.beta = beta_bound(b, row.L).beta;
            row.norm = op_norm(parallel_transport(w, g, solver));
            rows[i] = row;
        });
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const bool ok = rows[i].norm <= rows[i].beta * (1.0 + 1e-6);
            r.rows.push_back({std::to_string(i), num(rows[i].L), num(rows[i].beta),
                              num(rows[i].norm), flag(ok)});
            r.row_passed.push_back(ok);
        }
        r.summary["bounds"] = bounds_json(b);
        r.thresholds["norm_P"] = "<= beta(L(gamma1)) (1 + 1e-6)";
    };
}

Runner parse_sine_curve(const json& p, const std::string& path, const Context& ctx) {
    Checker& c = *ctx.check;
    std::optional<ParsedConnection> w;
    if (const json* cv = field(c, p, path, "connection", true)) {
        w = connection(c, *cv, join(path, "connection"));
    }
    const auto a = number(c, p, path, "a", -1.0);
    std::optional<std::vector<double>> bs;
    if (const json* bv = field(c, p, path, "b", true)) bs = number_list(c, *bv, join(path, "b"));
    std::optional<std::vector<double>> v;
    if (const json* vv = field(c, p, path, "v", true)) v = number_list(c, *vv, join(path, "v"));
    auto user_bounds = bounds(c, p, path);
    const auto floor = number(c, p, path, "b_floor", -1e-4);
    if (a && !(*a < 0)) c.fail(join(path, "a"), "must be negative");
    if (a && bs) {
        for (std::size_t i = 0; i < bs->size(); ++i) {
            if (!((*bs)[i] > *a && (*bs)[i] < 0)) {
                c.fail(index(join(path, "b"), i), "expected a < b < 0");
            }
        }
    }
    if (w && v && static_cast<int>(v->size()) != w->w.space.dim) {
        c.fail(join(path, "v"), fmt::format("expected {} entries", w->w.space.dim));
        return {};
    }
    if (!w || !a || !bs || !v || !floor) return {};
    SineCurveOptions opts;
    opts.b_floor = *floor;
    opts.solver = ctx.solver();
    const Vector vec(Eigen::Map<const ColumnVector>(v->data(), static_cast<Eigen::Index>(v->size())),
                     w->w.space);
    return [w = w->w, a = *a, bs = *bs, vec, user_bounds, opts](Report& r) {
        const SineCurveReport rep = sine_curve_scenario(w, a, bs, vec, user_bounds, opts);
        json errors = json::array();
        for (const auto& row : rep.rows) {
            r.rows.push_back({num(row.b), num(row.norm_P), num(row.beta), flag(row.passed)});
            r.row_passed.push_back(row.passed);
            if (row.error) errors.push_back({{"b", row.b}, {"error", *row.error}});
        }
        r.summary["bounds"] = bounds_json(rep.bounds);
        r.summary["C"] = std::isfinite(rep.C) ? json(rep.C) : json("inf");
        r.summary["row_errors"] = errors;
        json detail = json::array();
        for (const auto& row : rep.rows) {
            detail.push_back({{"b", row.b},
                              {"ratio", row.ratio},
                              {"beta_b", row.beta_b},
                              {"reverse_norm", row.reverse_norm},
                              {"roundtrip_defect", row.roundtrip_defect}});
        }
        r.summary["rows"] = detail;
        r.thresholds["norm_P"] = "||v|| / C (1 - 1e-6) <= norm_P <= C ||v|| (1 + 1e-6)";
    };
}

Runner parse_extend(const json& p, const std::string& path, const Context& ctx) {
    Checker& c = *ctx.check;
    std::optional<ParsedConnection> w;
    if (const json* cv = field(c, p, path, "connection", true)) {
        w = connection(c, *cv, join(path, "connection"));
    }
    std::optional<ScalarPath> f;
    if (const json* fv = field(c, p, path, "f", true)) f = scalar_path(c, *fv, join(path, "f"), "x");
    const auto a = number(c, p, path, "a");
    const auto v0 = number(c, p, path, "v0");
    const auto v1 = number(c, p, path, "v1");
    std::optional<std::vector<double>> seed;
    if (const json* sv = field(c, p, path, "sigma_seed", true)) {
        seed = number_list(c, *sv, join(path, "sigma_seed"));
    }
    std::optional<double> x_ref;
    if (field(c, p, path, "x_ref", false)) x_ref = number(c, p, path, "x_ref");

    std::optional<ExtensionGrid> grid;
    if (const json* gv = field(c, p, path, "grid", true)) {
        const std::string gp = join(path, "grid");
        const auto m = c.mark();
        std::optional<std::vector<double>> gx, gvv;
        if (!gv->is_object()) {
            c.fail(gp, "expected an object");
        } else {
            if (const json* x = field(c, *gv, gp, "x", true)) gx = number_list(c, *x, join(gp, "x"));
            if (const json* v = field(c, *gv, gp, "v", true)) gvv = number_list(c, *v, join(gp, "v"));
            const auto floor = number(c, *gv, gp, "floor", 1e-3);
            auto spec_ok = [&](const std::optional<std::vector<double>>& s, const char* key) {
                if (!s) return false;
                if (s->size() != 3 || !((*s)[0] < (*s)[1]) || (*s)[2] < 1 ||
                    (*s)[2] != std::floor((*s)[2])) {
                    c.fail(join(gp, key), "expected [lo, hi, cells] with lo < hi and cells >= 1");
                    return false;
                }
                return true;
            };
            const bool ok_x = spec_ok(gx, "x");
            const bool ok_v = spec_ok(gvv, "v");
            if (ok_x && ok_v && floor && a && c.clean_since(m)) {
                grid = ExtensionGrid::uniform((*gx)[0], (*gx)[1], static_cast<std::size_t>((*gx)[2]),
                                              (*gvv)[0], (*gvv)[1],
                                              static_cast<std::size_t>((*gvv)[2]), *a, *floor);
            }
        }
    }
    if (w && seed && static_cast<int>(seed->size()) != w->w.space.dim) {
        c.fail(join(path, "sigma_seed"), fmt::format("expected {} entries", w->w.space.dim));
        return {};
    }
    if (v0 && v1 && !(*v0 < *v1)) c.fail(join(path, "v1"), "expected v0 < v1");
    if (!w || !f || !a || !v0 || !v1 || !seed || !grid) return {};
    if (grid->x.size() < 3 || grid->v.size() < 3) {
        c.fail(join(path, "grid"), "needs at least three points per axis");
        return {};
    }
    ExtensionProblem prob{w->w, *f, *a, *v0, *v1,
                          Vector(Eigen::Map<const ColumnVector>(
                                     seed->data(), static_cast<Eigen::Index>(seed->size())),
                                 w->w.space),
                          x_ref};
    const bool flat = w->flat;
    return [prob, grid = *grid, flat, opts = ctx.solver(), tol = ctx.tols.solver](Report& r) {
        const SigmaMap sigma = build_sigma(prob, grid, opts);
        const ExtensionResult ext = extend_section(prob, sigma, grid, tol);
        const ResidualGrid r0 = parallel_residual(prob.omega, ext.xi0, 1);
        const ResidualGrid r1 = parallel_residual(prob.omega, ext.xi1, 1);
        const double h = grid.spacing();
        const auto mask = near_graph_mask(prob.f, prob.a, h);
        const ResidualGrid rs = parallel_residual(prob.omega, sigma.sigma, 1, mask);
        auto cell = [](const std::optional<double>& v) { return v ? num(*v) : std::string("nan"); };
        for (std::size_t i = 0; i < grid.x.size(); ++i) {
            for (std::size_t k = 0; k < grid.v.size(); ++k) {
                const bool ok = !flat || ext.gap[i][k] <= 100.0 * tol;
                r.rows.push_back({num(grid.x[i]), num(grid.v[k]), num(ext.gap[i][k]),
                                  cell(r0.values[i][k]), cell(r1.values[i][k])});
                r.row_passed.push_back(ok);
            }
        }
        r.summary["mode"] = flat ? "asserted" : "report-only";
        r.summary["max_gap"] = ext.max_gap;
        r.summary["accepted"] = ext.accepted;
        r.summary["loop_defect"] = sigma.loop_defect;
        r.summary["max_residual_xi0"] = r0.max();
        r.summary["max_residual_xi1"] = r1.max();
        r.summary["max_residual_sigma_off_graph"] = rs.max();
        r.summary["grid"] = {{"nx", grid.x.size()}, {"nv", grid.v.size()}, {"spacing", h}};
        if (r0.warning) r.summary["warning"] = *r0.warning;
        r.thresholds["gap"] = flat ? "<= 100 tol" : "reported only (connection not known flat)";
    };
}

Runner parse_cov_check(const json& p, const std::string& path, const Context& ctx) {
    Checker& c = *ctx.check;
    std::vector<Expression> ys;
    if (const json* yv = field(c, p, path, "y", true)) {
        const std::string yp = join(path, "y");
        if (!yv->is_array() || yv->empty()) {
            c.fail(yp, "expected a nonempty array of expressions in u");
        } else {
            for (std::size_t i = 0; i < yv->size(); ++i) {
                if (auto e = expression(c, (*yv)[i], index(yp, i), {"u"})) ys.push_back(*e);
            }
        }
    }
    std::optional<ScalarPath> f;
    if (const json* fv = field(c, p, path, "f", true)) f = scalar_path(c, *fv, join(path, "f"), "t");
    auto ps = pairs(c, p, path, std::nullopt, ctx.seed, false, std::nullopt);
    auto bps = breakpoints(c, p, path, "y_breakpoints");
    if (ys.empty() || !f || !ps || !bps) return {};
    auto y = [ys](double u) {
        ColumnVector out(static_cast<Eigen::Index>(ys.size()));
        for (std::size_t i = 0; i < ys.size(); ++i) out(static_cast<Eigen::Index>(i)) = ys[i](u);
        return out;
    };
    return [y, f = *f, ps = *ps, bps = *bps, tol = ctx.tols.solver](Report& r) {
        std::vector<CovCheck> checks(ps.size());
        parallel_for(ps.size(), [&](std::size_t i) {
            checks[i] = cov_check(y, f, ps[i].first, ps[i].second, tol, bps);
        });
        double worst = 0.0;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const auto& k = checks[i];
            r.rows.push_back({num(ps[i].first), num(ps[i].second), num(k.lhs.norm()),
                              num(k.rhs.norm()), num(k.defect), flag(k.passed)});
            r.row_passed.push_back(k.passed);
            worst = std::max(worst, k.defect);
        }
        r.summary["max_defect"] = worst;
        r.thresholds["defect"] = "<= 10 tol";
    };
}

using Parser = Runner (*)(const json&, const std::string&, const Context&);

const std::map<std::string, std::pair<Parser, std::vector<std::string>>>& kind_table() {
    static const std::map<std::string, std::pair<Parser, std::vector<std::string>>> table = {
        {"evolve",
         {parse_evolve,
          {"s", "t", "norm_X", "norm_Xinv", "inverse_defect", "closed_form_error", "pass"}}},
        {"certify",
         {parse_certify,
          {"N", "V", "C", "log_C", "log_exponent", "v_lower", "sup_grid", "sup_converged",
           "status", "pass"}}},
        {"verify", {parse_verify, {"s", "t", "norm_X", "norm_Xinv", "C", "ratio"}}},
        {"substitution", {parse_substitution, {"s", "t", "defect", "pass"}}},
        {"transport", {parse_transport, {"curve", "L1", "beta", "norm_P", "pass"}}},
        {"sine-curve", {parse_sine_curve, {"b", "norm_P", "beta", "pass"}}},
        {"extend", {parse_extend, {"x", "v", "gap", "residual_xi0", "residual_xi1"}}},
        {"cov-check", {parse_cov_check, {"s", "t", "norm_lhs", "norm_rhs", "defect", "pass"}}},
    };
    return table;
}

} // namespace

const std::vector<std::string>& scenario_kinds() {
    static const std::vector<std::string> kinds = [] {
        std::vector<std::string> k;
        for (const auto& [name, entry] : kind_table()) k.push_back(name);
        return k;
    }();
    return kinds;
}

const std::vector<std::string>& csv_columns(std::string_view kind) {
    const auto it = kind_table().find(std::string(kind));
    if (it == kind_table().end()) {
        throw ValidationError({fmt::format("kind: unknown kind '{}'", kind)});
    }
    return it->second.second;
}

Report run_scenario(const json& config, const RunOverrides& overrides) {
    if (!config.is_object()) throw ValidationError({"config: expected a JSON object"});
    Checker c;
    std::string kind;
    if (const auto it = config.find("kind"); it != config.end()) {
        if (!it->is_string()) c.fail("kind", "expected a string");
        else kind = it->get<std::string>();
    }
    if (overrides.kind) {
        if (!kind.empty() && kind != *overrides.kind) {
            c.fail("kind", fmt::format("config says '{}' but '{}' was requested", kind,
                                       *overrides.kind));
        }
        kind = *overrides.kind;
    }
    if (kind.empty()) c.fail("kind", "missing");
    const auto entry = kind_table().find(kind);
    if (!kind.empty() && entry == kind_table().end()) {
        std::string known;
        for (const auto& k : scenario_kinds()) known += (known.empty() ? "" : ", ") + k;
        c.fail("kind", fmt::format("unknown kind '{}'; expected one of {}", kind, known));
    }

    Context ctx;
    ctx.check = &c;
    if (const auto it = config.find("seed"); it != config.end()) {
        if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) {
            c.fail("seed", "expected a nonnegative integer");
        } else {
            ctx.seed = it->get<std::uint64_t>();
        }
    }
    if (overrides.seed) ctx.seed = *overrides.seed;
    if (const auto it = config.find("tolerances"); it != config.end()) {
        if (!it->is_object()) {
            c.fail("tolerances", "expected an object");
        } else {
            if (auto s = number(c, *it, "tolerances", "solver", ctx.tols.solver)) ctx.tols.solver = *s;
            if (auto q = number(c, *it, "tolerances", "quadrature", ctx.tols.quadrature)) {
                ctx.tols.quadrature = *q;
            }
        }
    }
    if (overrides.tol) ctx.tols.solver = *overrides.tol;
    if (!(ctx.tols.solver > 0)) c.fail("tolerances.solver", "must be positive");
    if (!(ctx.tols.quadrature > 0)) c.fail("tolerances.quadrature", "must be positive");

    const auto params = config.find("parameters");
    if (params == config.end()) {
        c.fail("parameters", "missing");
    } else if (!params->is_object()) {
        c.fail("parameters", "expected an object");
    }
    Runner run;
    if (entry != kind_table().end() && params != config.end() && params->is_object()) {
        run = entry->second.first(*params, "parameters", ctx);
    }
    c.raise();
    if (!run) throw ValidationError({"parameters: invalid"});

    Report r;
    r.kind = kind;
    r.scenario = config;
    r.scenario["kind"] = kind;
    r.scenario["seed"] = ctx.seed;
    r.scenario["tolerances"] = {{"solver", ctx.tols.solver}, {"quadrature", ctx.tols.quadrature}};
    r.columns = entry->second.second;
    r.provenance = {{"tool", "evostab"},
                    {"version", kVersion},
                    {"tolerances", r.scenario["tolerances"]},
                    {"seed", ctx.seed},
                    {"threads", thread_count()}};

    const auto t0 = std::chrono::steady_clock::now();
    try {
        run(r);
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& e) {
        r.error = e.what();
    }
    r.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.passed = r.passed && !r.error &&
               std::all_of(r.row_passed.begin(), r.row_passed.end(), [](bool b) { return b; });
    return r;
}

Report run_scenario_text(std::string_view text, const RunOverrides& overrides) {
    json config;
    try {
        config = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError({fmt::format("config: not valid JSON ({})", e.what())});
    }
    return run_scenario(config, overrides);
}

std::string csv_text(const Report& r) {
    std::string out;
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
        if (i) out += ',';
        out += r.columns[i];
    }
    out += '\n';
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

json summary_json(const Report& r) {
    const auto failing = static_cast<std::size_t>(
        std::count(r.row_passed.begin(), r.row_passed.end(), false));
    json s = {{"kind", r.kind},
              {"pass", r.passed},
              {"rows", r.rows.size()},
              {"failing_rows", failing},
              {"columns", r.columns},
              {"results", r.summary},
              {"thresholds", r.thresholds},
              {"runtime_seconds", r.runtime_seconds},
              {"provenance", r.provenance},
              {"scenario", r.scenario}};
    if (r.error) s["error"] = *r.error;
    return s;
}

void emit_report(const Report& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error(
            fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
    }
    auto write = [](const std::filesystem::path& file, const std::string& text) {
        std::ofstream out(file, std::ios::binary);
        out << text;
        out.close();
        if (!out) throw std::runtime_error(fmt::format("cannot write {}", file.string()));
    };
    write(dir / "rows.csv", csv_text(r));
    write(dir / "summary.json", summary_json(r).dump(2) + "\n");
}

int exit_code(const Report& r) { return r.passed ? 0 : 1; }

} // namespace evostab
