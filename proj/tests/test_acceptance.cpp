// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "weylab/experiments.hpp"

using namespace weylab;
namespace fs = std::filesystem;

namespace {

constexpr double kBudgetSeconds = 60.0;

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "!") + what;
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

const ContextPtr& ctx() {
    static const auto c = HermiteContext::build(1, 64, 14.0, 224);
    return c;
}
const GridSpec grid{1, 12.0, 64};

ExperimentResult run(const std::string& name, const json& over = json::object()) {
    json raw = over;
    raw["experiment"] = name;
    const auto c = parse_config(raw);
    (void)validate_config(c);
    return find_experiment(name).run(c);
}

// Every check of an experiment must pass; returns the failing names.
void require_checks(Outcome& o, const ExperimentResult& r, const std::string& tag) {
    for (const auto& k : r.checks)
        if (!k.pass) o.require(false, tag + ": " + k.name + " = " + num(k.value));
}

const Check* find_check(const ExperimentResult& r, const std::string& prefix) {
    for (const auto& k : r.checks)
        if (k.name.rfind(prefix, 0) == 0) return &k;
    return nullptr;
}

double check_value(Outcome& o, const ExperimentResult& r, const std::string& prefix) {
    const auto* k = find_check(r, prefix);
    if (!k) {
        o.require(false, "missing check '" + prefix + "'");
        return NAN;
    }
    return k->value;
}

// ---- criteria -------------------------------------------------------------------------------

Outcome plancherel() {
    Outcome o;
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const auto f = random_band_limited(ctx(), grid, 12, rng);
        const double r = weyl_transform(ctx(), f).entries().squaredNorm() / (2.0 * kPi) / std::pow(f.norm(), 2);
        worst = std::max(worst, std::abs(r - 1.0));
    }
    o.require(worst <= 1e-3, "max |ratio - 1| = " + num(worst));
    return o;
}

Outcome inversion() {
    Outcome o;
    double worst = 0.0;
    for (int a = 0; a <= 8; ++a)
        for (int b = 0; b <= 8; ++b) {
            const auto phi = special_hermite_fn(ctx(), a, b, grid);
            worst = std::max(worst, (inverse_weyl(ctx(), weyl_transform(ctx(), phi), grid) - phi).norm() / phi.norm());
        }
    o.require(worst < 1e-3, "max relative error over 81 functions = " + num(worst));
    return o;
}

Outcome homomorphism() {
    Outcome o;
    std::mt19937_64 rng(99);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const auto f = random_band_limited(ctx(), grid, 8, rng), g = random_band_limited(ctx(), grid, 8, rng);
        const CMatrix prod = weyl_transform(ctx(), f).entries() * weyl_transform(ctx(), g).entries();
        const CMatrix fg = weyl_transform(ctx(), twisted_convolve(f, g)).entries();
        worst = std::max(worst, (fg - prod).norm() / prod.norm());
    }
    o.require(worst < 1e-3, "max relative error over 10 pairs = " + num(worst));
    return o;
}

Outcome exact_identities() {
    Outcome o;
    const auto r = run("prop42");
    require_checks(o, r, "ladder identities");
    const auto& e = r.results.at("exact");
    double worst = 0.0;
    for (const char* k : {"H_from_ladder", "canonical_commutator", "dbar_inverse_sqrt"})
        worst = std::max(worst, e.at(k).get<double>());
    worst = std::max(worst, check_value(o, r, "heat band closed form"));
    worst = std::max(worst, check_value(o, r, "four-term"));
    o.require(worst < 1e-10, "ladder, commutator, dbar, band and four-term max residual = " + num(worst));
    // With delta(m) = [m, A] and A f(H) = f(H + 2) A the commutator is
    // (H^{-1/2} - (H + 2)^{-1/2}) A; the required form carries the other sign.
    const double stated = e.at("delta_inverse_sqrt_opposite_sign").get<double>();
    o.require(stated < 1e-10, "delta H^{-1/2} = ((H+2)^{-1/2} - H^{-1/2}) A residual = " + num(stated));
    o.detail += "; same identity with (H^{-1/2} - (H+2)^{-1/2}) A: " + num(e.at("delta_inverse_sqrt").get<double>());
    return o;
}

Outcome counterexample() {
    Outcome o;
    const auto r = run("counterexample-16");
    require_checks(o, r, "counterexample");
    const double rel = r.results.at("max_rel_diff"), slope = r.results.at("slope"), ratio = r.results.at("ratio_64_16");
    o.require(rel < 1e-8, "closed form rel " + num(rel));
    o.require(std::abs(slope - 0.5) <= 0.05, "slope " + num(slope));
    o.require(std::abs(ratio - 2.0) <= 0.2, "ratio " + num(ratio));
    return o;
}

Outcome mauceri() {
    Outcome o;
    const auto id = OperatorMatrix::identity(ctx());
    const auto r0 = mauceri_constant(id, 0);
    o.require(r0.constant == 0.5, "l = 0 constant " + num(r0.constant));
    double rest = 0.0;
    for (int l = 1; l <= 2; ++l)
        for (const auto& e : mauceri_constant(id, l).table)
            if (e.alpha[0] + e.beta[0] >= 1) rest = std::max(rest, e.sup);
    o.require(rest == 0.0, "max over l >= 1 rows " + num(rest));
    return o;
}

Outcome envelopes() {
    Outcome o;
    const auto r = run("kernel-decay");
    const double lim = 3.0;  // upper side: no blow-up across bands
    for (const char* k : {"decay", "smoothness"}) {
        const auto& s = r.results.at(k);
        const double hi = s.at("max_over_median"), lo = s.at("min_over_median");
        o.require(hi < lim, std::string(k) + " max/median " + num(hi) + " (min/median " + num(lo) + ")");
    }
    return o;
}

Outcome rapid_decrease() {
    Outcome o;
    const auto r = run("kernel-decay");
    for (const char* k : {"shape fall (0,0)", "shape fall (1,0)", "shape fall (0,1)"}) {
        const double v = check_value(o, r, k);
        o.require(v >= 1e3, std::string(k) + " " + num(v));
    }
    return o;
}

Outcome sharp_maximal() {
    Outcome o;
    const auto r = run("sharp-maximal");
    require_checks(o, r, "sharp-maximal");
    const double d = check_value(o, r, "sharp maximal vs definition");
    o.require(d <= 1e-12, "definition diff " + num(d));
    for (const char* tag : {"cutoff", "multiplier"}) {
        const double f = check_value(o, r, std::string(tag) + ": domination finite");
        const double s = check_value(o, r, std::string(tag) + ": fine / coarse");
        o.require(std::isfinite(f) && std::abs(s - 1.0) <= 0.5, std::string(tag) + " stat " + num(f) + " fine/coarse " + num(s));
    }
    return o;
}

Outcome ap_harness() {
    Outcome o;
    const PhaseGridFunction one = PhaseGridFunction::sample(grid, [](double, double) { return cplx(1.0); });
    for (double p : {1.5, 2.0, 4.0}) {
        const double a = ap_constant(one, p);
        o.require(a == 1.0, "A_" + num(p) + "(1) = " + num(a));
    }
    const auto r = run("weighted-norm");
    require_checks(o, r, "weighted-norm");
    const double st = check_value(o, r, "stable weight"), dv = check_value(o, r, "divergent weight");
    const double wr = check_value(o, r, "weighted ratio finite"), ws = check_value(o, r, "weighted ratio fine / coarse");
    o.require(std::abs(st - 1.0) <= 0.2, "a=-1 fine/coarse " + num(st));
    o.require(dv > 1.2, "a=-3 fine/coarse " + num(dv) + " (flagged divergent)");
    o.require(std::isfinite(wr) && std::abs(ws - 1.0) <= 0.3, "weighted max " + num(wr) + " fine/coarse " + num(ws));
    return o;
}

Outcome lambda_derivative() {
    Outcome o;
    const auto r = run("lemma24");
    require_checks(o, r, "lambda derivative");
    o.require(check_value(o, r, "exactly one convention") == 1.0, "one convention closes");
    const double res = check_value(o, r, "winning residual"), gain = check_value(o, r, "halving gain");
    o.require(res < 1e-2, "residual " + num(res));
    o.require(std::abs(gain - 4.0) <= 0.5, "halving gain " + num(gain));
    o.detail += "; winner " + r.results.value("winner", std::string("?"));
    return o;
}

Outcome scaling_fields_convolution() {
    Outcome o;
    const auto s = run("scaling-21");
    require_checks(o, s, "scaling");
    for (const char* k : {"two-path agreement at lambda = 4", "two-path agreement at lambda = -4"}) {
        const double v = check_value(o, s, k);
        o.require(v < 1e-3, std::string(k) + ": " + num(v));
    }
    const auto v = run("vectorfields-23");
    require_checks(o, v, "vector fields");
    o.require(check_value(o, v, "max residual") < 1e-2, "vector fields max " + num(check_value(o, v, "max residual")));
    const double gain = check_value(o, v, "refinement gain");
    o.require(std::abs(gain - 4.0) <= 0.6, "refinement gain " + num(gain));
    const auto l = run("lemma41");
    require_checks(o, l, "convolution");
    const double g = check_value(o, l, "gaussian kernel");
    o.require(g < 1e-3, "gaussian kernel two-path " + num(g));
    return o;
}

Outcome rbound() {
    Outcome o;
    const auto r = run("rbound");
    require_checks(o, r, "rbound");
    o.require(check_value(o, r, "singleton") < 1e-12, "singleton exact");
    o.require(std::abs(check_value(o, r, "{I, 2I}") - 2.0) < 1e-12, "{I,2I} = " + num(check_value(o, r, "{I, 2I}")));
    o.require(check_value(o, r, "{T_P0, T_P1}") <= 1.0 + 1e-3, "{P0,P1} " + num(check_value(o, r, "{T_P0, T_P1}")));
    o.require(check_value(o, r, "[B, T_R] statistic increases") == 1.0, "[B,T_R] growth monotone");
    return o;
}

Outcome fiber_theorems() {
    Outcome o;
    const std::pair<const char*, const char*> runs[] = {{"theorem19", "sublaplacian"}, {"theorem110", "polyradial"}};
    for (const auto& [name, tag] : runs) {
        const auto r = run(name);
        require_checks(o, r, tag);
        const double id = check_value(o, r, "identity family ratio");
        o.require(id <= 1.0 + 1e-3, std::string(tag) + " identity " + num(id));
        for (const auto& k : r.checks)
            if (k.name.rfind("fine / coarse", 0) == 0)
                o.require(std::abs(k.value - 1.0) <= 0.3, std::string(tag) + " " + k.name + " " + num(k.value));
    }
    return o;
}

// ---- determinism via the command-line tool --------------------------------------------------

struct Proc {
    int rc;
    std::string out;
};

Proc sh(const std::string& args, const fs::path& dir) {
    const auto log = dir / "out.txt";
    const std::string cmd = std::string("\"") + WEYLAB_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>/dev/null";
    const int st = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome determinism() {
    Outcome o;
    const fs::path tmp = fs::temp_directory_path() / ("weylab_accept_" + std::to_string(::getpid()));
    fs::create_directories(tmp);
    const fs::path cfgs = fs::path(WEYLAB_SOURCE_DIR) / "configs";

    std::vector<fs::path> configs;
    for (const auto& e : fs::directory_iterator(cfgs))
        if (e.path().stem() != "capacity-error") configs.push_back(e.path());
    std::sort(configs.begin(), configs.end());
    int compared = 0;
    for (const auto& cfg : configs) {
        std::string path = cfg.string();
        const std::string stem = cfg.stem().string();
        if (stem == "theorem19" || stem == "theorem110") {  // smaller panel keeps the double run in budget
            json j = json::parse(slurp(cfg));
            j["params"]["count"] = 1;
            path = (tmp / (stem + ".json")).string();
            std::ofstream(path) << j.dump();
        }
        std::string rep[2];
        for (int k = 0; k < 2; ++k) {
            const auto p = sh("run \"" + path + "\" --workers 1 --out \"" + (tmp / ("r" + std::to_string(k))).string() + "\"", tmp);
            if (p.rc != 0) o.require(false, stem + " exit " + std::to_string(p.rc));
            rep[k] = slurp(fs::path(p.out.substr(0, p.out.find('\n'))) / "report.json");
        }
        if (rep[0].empty() || rep[0] != rep[1]) o.require(false, stem + " reports differ");
        ++compared;
    }
    const std::string l0 = sh("list-experiments", tmp).out, l1 = sh("list-experiments", tmp).out;
    const std::string v0 = sh("validate \"" + (cfgs / "rbound.json").string() + "\"", tmp).out;
    const std::string v1 = sh("validate \"" + (cfgs / "rbound.json").string() + "\"", tmp).out;
    (void)sh("export-matrix S --index 2 --out \"" + (tmp / "a.bin").string() + "\"", tmp);
    (void)sh("export-matrix S --index 2 --out \"" + (tmp / "b.bin").string() + "\"", tmp);
    o.require(l0 == l1 && !l0.empty(), "list-experiments");
    o.require(v0 == v1 && !v0.empty(), "validate");
    o.require(slurp(tmp / "a.bin") == slurp(tmp / "b.bin") && !slurp(tmp / "a.bin").empty(), "export-matrix");
    o.require(o.pass, std::to_string(compared) + " experiment reports byte-identical");
    std::error_code ec;
    fs::remove_all(tmp, ec);
    return o;
}

}  // namespace

int main() {
    default_workers() = 1;
    struct Criterion {
        const char* name;
        std::function<Outcome()> fn;
        double budget;
    };
    const std::vector<Criterion> criteria = {
        {"Plancherel at lambda = 1", plancherel, kBudgetSeconds},
        {"inversion round trip", inversion, kBudgetSeconds},
        {"twisted convolution homomorphism", homomorphism, kBudgetSeconds},
        {"exact operator identities", exact_identities, kBudgetSeconds},
        {"Riesz growth counterexample", counterexample, kBudgetSeconds},
        {"dyadic HS checker on the identity", mauceri, kBudgetSeconds},
        {"heat-band kernel envelopes", envelopes, kBudgetSeconds},
        {"rapid decrease of band derivatives", rapid_decrease, kBudgetSeconds},
        {"twisted sharp maximal function", sharp_maximal, kBudgetSeconds},
        {"A_p harness and weighted ratios", ap_harness, kBudgetSeconds},
        {"lambda-derivative identity", lambda_derivative, kBudgetSeconds},
        {"scaling, vector fields, fiber convolution", scaling_fields_convolution, kBudgetSeconds},
        {"R-bound estimator", rbound, kBudgetSeconds},
        {"Heisenberg multiplier ratios", fiber_theorems, kBudgetSeconds},
        {"determinism of repeated runs", determinism, kBudgetSeconds},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > criteria[i].budget) o.require(false, "over the " + num(criteria[i].budget) + " s budget");
        std::printf("%s %2zu %s [%.1fs] %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, secs, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
