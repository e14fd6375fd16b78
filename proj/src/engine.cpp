#include "dicat/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

namespace dicat {

bool CheckReport::all_passed() const {
    if (!structure.ok) return false;
    if (fibrations.level1 == FibrationStatus::Fail || fibrations.level2 == FibrationStatus::Fail)
        return false;
    for (const auto& a : axioms)
        if (!a.ok()) return false;
    return true;
}

double CheckReport::max_axiom_residual() const {
    double r = 0.0;
    for (const auto& a : axioms) r = std::max(r, a.max_residual);
    return r;
}

std::size_t thread_count_from_env(std::size_t requested) {
    if (const char* env = std::getenv("DICAT_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return requested == 0 ? 1 : requested;
}

bool glob_match(const std::string& pattern, const std::string& text) {
    // iterative * matcher
    std::size_t p = 0, t = 0, star = std::string::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

namespace {

std::string probe_label(const InstanceOracle& o, const ObjVal& p) {
    if (!p.is_tuple) return o.describe_obj(p.h);
    std::string s = "(";
    for (std::size_t i = 0; i < p.parts.size(); ++i) {
        if (i) s += ",";
        s += probe_label(o, p.parts[i]);
    }
    return s + ")";
}

}  // namespace

AxiomResult check_axiom(const DicatData& d, const AxiomDef& ax, const RunConfig& cfg) {
    AxiomResult out;
    out.id = ax.id;
    out.cite = ax.cite;
    const InstanceOracle& o = *d.oracle;
    std::vector<ObjVal> probes = enumerate_probes(o, ax.dom, cfg.probe_cap);
    out.probes = probes.size();
    for (std::size_t i = 0; i < probes.size(); ++i) {
        ProbeResult pr;
        pr.probe_index = i;
        try {
            MorHandle lhs = evaluate(o, ax.lhs, probes[i]);
            MorHandle rhs = evaluate(o, ax.rhs, probes[i]);
            pr.residual = o.equal_residual(lhs, rhs);
            pr.pass = pr.residual <= cfg.tol;
        } catch (const std::exception& e) {
            pr.pass = false;
            pr.error = e.what();
            pr.residual = std::numeric_limits<double>::infinity();
        }
        if (std::isfinite(pr.residual) && (pr.residual > out.max_residual || out.worst_probe.empty())) {
            out.max_residual = std::max(out.max_residual, pr.residual);
            out.worst_probe = probe_label(o, probes[i]);
        }
        if (!pr.pass) {
            ++out.failures;
            pr.probe = probe_label(o, probes[i]);
            if (!pr.error.empty()) out.worst_probe = pr.probe;
            if (out.failing.size() < 32) out.failing.push_back(pr);
        }
    }
    return out;
}

CheckReport run_suite(const DicatData& d, const std::vector<AxiomDef>& axioms,
                      const RunConfig& cfg) {
    CheckReport rep;
    rep.instance = d.oracle->name();
    rep.seed = cfg.seed;
    rep.tol = cfg.tol;

    rep.structure = validate_structure(d, cfg.tol, cfg.probe_cap);
    rep.structure_ran = true;
    if (!rep.structure.ok) return rep;  // no axiom run on ill-formed data

    if (!cfg.skip_fibrations) rep.fibrations = check_fibrations(d, cfg.tol);

    std::vector<const AxiomDef*> selected;
    for (const auto& ax : axioms) {
        if (cfg.axiom_filter.empty()) {
            selected.push_back(&ax);
            continue;
        }
        for (const auto& pat : cfg.axiom_filter)
            if (glob_match(pat, ax.id)) {
                selected.push_back(&ax);
                break;
            }
    }

    rep.axioms.resize(selected.size());
    const std::size_t threads = std::max<std::size_t>(1, thread_count_from_env(cfg.threads));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= selected.size()) break;
            rep.axioms[i] = check_axiom(d, *selected[i], cfg);
        }
    };
    if (threads == 1 || selected.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    rep.axioms_ran = true;
    return rep;
}

// --- mutation harness ------------------------------------------------------------

namespace {

class MutatedOracle : public InstanceOracle {
public:
    MutatedOracle(std::shared_ptr<InstanceOracle> base, MutationSpec spec)
        : base_(std::move(base)), spec_(spec) {
        if (spec_.single_probe) {
            const GenSchema& g = gen_schema(spec_.target);
            auto probes = enumerate_probes(*base_, g.dom, 4096);
            if (!probes.empty()) {
                const ObjVal& p = probes[spec_.seed % probes.size()];
                if (p.is_tuple)
                    for (auto& q : p.parts) pick_.push_back(q.h);
                else
                    pick_.push_back(p.h);
            }
        }
    }

    std::string name() const override {
        return base_->name() + "+mutate(" + d2_name(spec_.target) + ")";
    }
    bool exhaustive() const override { return base_->exhaustive(); }
    std::vector<ObjHandle> probe_objects(int level) const override {
        return base_->probe_objects(level);
    }
    std::vector<MorHandle> probe_morphisms(int level) const override {
        return base_->probe_morphisms(level);
    }
    ObjHandle src(ObjHandle x) const override { return base_->src(x); }
    ObjHandle tgt(ObjHandle x) const override { return base_->tgt(x); }
    MorHandle src_mor(MorHandle f) const override { return base_->src_mor(f); }
    MorHandle tgt_mor(MorHandle f) const override { return base_->tgt_mor(f); }
    ObjHandle mor_source(MorHandle f) const override { return base_->mor_source(f); }
    ObjHandle mor_target(MorHandle f) const override { return base_->mor_target(f); }
    ObjHandle apply_d1(D1Key k, std::span<const ObjHandle> args) const override {
        return base_->apply_d1(k, args);
    }
    MorHandle apply_d1_mor(D1Key k, std::span<const MorHandle> args) const override {
        return base_->apply_d1_mor(k, args);
    }
    MorHandle d2_component(D2Key k, std::span<const ObjHandle> args) const override {
        MorHandle comp = base_->d2_component(k, args);
        if (k != spec_.target || spec_.identity) return comp;
        if (spec_.single_probe) {
            if (pick_.size() != args.size()) return comp;
            for (std::size_t i = 0; i < args.size(); ++i)
                if (!(args[i] == pick_[i])) return comp;
        }
        return base_->mutate_scale(comp, spec_.seed);
    }
    MorHandle witness_component(WitnessKey k, ObjHandle arg) const override {
        return base_->witness_component(k, arg);
    }
    MorHandle identity(ObjHandle x) const override { return base_->identity(x); }
    MorHandle compose(MorHandle f, MorHandle g) const override { return base_->compose(f, g); }
    MorHandle invert(MorHandle f) const override { return base_->invert(f); }
    bool is_invertible(MorHandle f) const override { return base_->is_invertible(f); }
    double equal_residual(MorHandle f, MorHandle g) const override {
        return base_->equal_residual(f, g);
    }
    std::string describe_obj(ObjHandle x) const override { return base_->describe_obj(x); }
    std::string describe_mor(MorHandle f) const override { return base_->describe_mor(f); }
    std::optional<MorHandle> transport1(ObjHandle d, MorHandle a, MorHandle b) const override {
        return base_->transport1(d, a, b);
    }
    std::optional<MorHandle> transport2(ObjHandle h, MorHandle delta, MorHandle eps) const override {
        return base_->transport2(h, delta, eps);
    }
    MorHandle mutate_scale(MorHandle f, std::uint64_t seed) const override {
        return base_->mutate_scale(f, seed);
    }

private:
    std::shared_ptr<InstanceOracle> base_;
    MutationSpec spec_;
    std::vector<ObjHandle> pick_;
};

}  // namespace

std::shared_ptr<InstanceOracle> make_mutated_oracle(std::shared_ptr<InstanceOracle> base,
                                                    const MutationSpec& spec) {
    return std::make_shared<MutatedOracle>(std::move(base), spec);
}

MutationOutcome mutate_and_check(const DicatData& d, const std::vector<AxiomDef>& axioms,
                                 const MutationSpec& spec, const RunConfig& cfg) {
    MutationOutcome out;
    DicatData mutated = d;
    mutated.oracle = make_mutated_oracle(d.oracle, spec);
    out.report = run_suite(mutated, axioms, cfg);
    for (const auto& it : out.report.structure.items)
        if (!it.ok) out.failed_structure.push_back(it.item);
    for (const auto& ax : out.report.axioms)
        if (!ax.ok()) out.failed_axioms.push_back(ax.id);
    out.detected = !out.failed_axioms.empty() || !out.failed_structure.empty();
    return out;
}

}  // namespace dicat
