#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dicat/engine.hpp"
#include "dicat/json_io.hpp"

using namespace dicat;

namespace {

CocycleInstance builtin_group(const std::string& name, const std::string& omega) {
    const bool nontrivial = omega == "nontrivial";
    if (name == "z2") return z2_instance(nontrivial);
    if (name.size() == 2 && name[0] == 'z' && name[1] >= '2' && name[1] <= '6')
        return zn_instance(name[1] - '0', nontrivial ? 1 : 0);
    if (name == "s3") {
        // symmetric group on three letters via permutation composition
        std::vector<std::array<int, 3>> perms = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1},
                                                 {1, 0, 2}, {0, 2, 1}, {2, 1, 0}};
        CocycleInstance c;
        c.label = "s3";
        c.group.assign(6, std::vector<int>(6, 0));
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b) {
                std::array<int, 3> ab{};
                for (int i = 0; i < 3; ++i) ab[i] = perms[a][perms[b][i]];
                for (int k = 0; k < 6; ++k)
                    if (perms[k] == ab) c.group[a][b] = k;
            }
        c.unit = 0;
        c.root_order = 2;
        c.omega.assign(6, std::vector<std::vector<int>>(6, std::vector<int>(6, 0)));
        if (nontrivial)
            throw SchemaError("no built-in nontrivial cochain for s3; supply a cocycle/v1 file");
        return c;
    }
    throw SchemaError("unknown group '" + name + "' (built in: z2..z6, s3)");
}

struct CommonOpts {
    std::string instance = "morita";
    std::string file;
    std::string group = "z2";
    std::string omega = "nontrivial";
    std::vector<std::string> tamper;
    std::string probes = "default";
    std::vector<std::string> axioms;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    bool scramble = false;
    std::string report_path;
    std::string format = "text";
    std::size_t probe_cap = 400;
    std::size_t threads = 8;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--instance", o.instance, "morita | cocycle | trivial | file");
    cmd->add_option("--file", o.file, "instance file (dicat/v1, cocycle/v1 or morita/v1)");
    cmd->add_option("--group", o.group, "built-in group for the cocycle instance (z2..z6, s3)");
    cmd->add_option("--omega", o.omega, "trivial | nontrivial");
    cmd->add_option("--tamper", o.tamper, "g,h,k triple(s) whose cochain entry gets flipped");
    cmd->add_option("--probes", o.probes, "probe preset: default | small");
    cmd->add_option("--axioms", o.axioms, "axiom id globs, e.g. D3-17 or D3-1*");
    cmd->add_option("--tol", o.tol, "comparison tolerance");
    cmd->add_option("--seed", o.seed, "seed for scrambling and random probes");
    cmd->add_flag("--scramble", o.scramble, "conjugate every fusion basis by a seeded matrix");
    cmd->add_option("--report", o.report_path, "write the JSON report here");
    cmd->add_option("--format", o.format, "stdout format: text | json");
    cmd->add_option("--probe-cap", o.probe_cap, "max probe tuples per axiom");
    cmd->add_option("--threads", o.threads, "worker threads (DICAT_THREADS overrides)");
}

std::vector<std::array<int, 3>> parse_tampers(const std::vector<std::string>& raw) {
    std::vector<std::array<int, 3>> out;
    for (const auto& t : raw) {
        std::array<int, 3> triple{};
        if (std::sscanf(t.c_str(), "%d,%d,%d", &triple[0], &triple[1], &triple[2]) != 3)
            throw SchemaError("--tamper expects g,h,k");
        out.push_back(triple);
    }
    return out;
}

DicatData load_instance(const CommonOpts& o) {
    if (!o.file.empty()) {
        std::ifstream in(o.file);
        if (!in) throw SchemaError("cannot open " + o.file);
        ordered_json j = ordered_json::parse(in);
        std::string schema = j.value("schema", "");
        if (schema == "dicat/v1")
            return DicatData::wrap(std::make_shared<FinCatOracle>(dicat_from_json(j)));
        if (schema == "cocycle/v1") {
            CocycleInstance c = cocycle_from_json(j);
            tamper(c, parse_tampers(o.tamper));
            return build_cocycle_instance(c);
        }
        if (schema == "morita/v1") {
            MoritaConfig cfg;
            cfg.tol = o.tol;
            cfg.scramble = o.scramble;
            cfg.seed = o.seed;
            return morita_from_json(j, cfg);
        }
        throw SchemaError("unsupported schema '" + schema + "'");
    }
    if (o.instance == "morita") {
        MoritaConfig cfg;
        cfg.tol = o.tol;
        cfg.scramble = o.scramble;
        cfg.seed = o.seed;
        cfg.probe_preset = o.probes;
        return build_morita_instance(cfg);
    }
    if (o.instance == "cocycle") {
        CocycleInstance c = builtin_group(o.group, o.omega);
        auto triples = parse_tampers(o.tamper);
        if (!triples.empty()) {
            tamper(c, triples);
            c.label += "-tampered";
        }
        return build_cocycle_instance(c);
    }
    if (o.instance == "trivial") return build_trivial_instance();
    throw SchemaError("unknown instance '" + o.instance + "'");
}

int emit(const CheckReport& rep, const CommonOpts& o) {
    ordered_json j = report_to_json(rep);
    if (!o.report_path.empty()) {
        std::ofstream out(o.report_path);
        out << j.dump(2) << "\n";
    }
    if (o.format == "json")
        std::cout << j.dump(2) << "\n";
    else
        std::cout << report_to_text(rep);
    return rep.all_passed() ? 0 : 1;
}

RunConfig run_config(const CommonOpts& o) {
    RunConfig cfg;
    cfg.tol = o.tol;
    cfg.seed = o.seed;
    cfg.probe_cap = o.probe_cap;
    cfg.threads = o.threads;
    cfg.axiom_filter = o.axioms;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coherence checker for dicategory instances"};
    app.require_subcommand(1);

    CommonOpts check_opts;
    CLI::App* check = app.add_subcommand("check", "run structural validation and the axiom suite");
    add_common(check, check_opts);

    CommonOpts mut_opts;
    std::string target = "D2-12";
    std::uint64_t mut_seed = 1;
    bool single = false, noop = false;
    CLI::App* mut = app.add_subcommand("mutate", "negative control: perturb one transformation");
    add_common(mut, mut_opts);
    mut->add_option("--target", target, "transformation to perturb (D2-1..D2-18)");
    mut->add_option("--mutation-seed", mut_seed, "seed of the perturbation");
    mut->add_flag("--single-probe", single, "perturb a single component only");
    mut->add_flag("--identity-mutation", noop, "scale by 1 (expected to go undetected)");

    std::string validate_path;
    CLI::App* val = app.add_subcommand("validate", "schema and structural validation only");
    val->add_option("path", validate_path, "instance file")->required();
    double val_tol = 1e-9;
    val->add_option("--tol", val_tol, "comparison tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (check->parsed()) {
            DicatData d = load_instance(check_opts);
            CheckReport rep = run_suite(d, default_axioms(), run_config(check_opts));
            return emit(rep, check_opts);
        }
        if (mut->parsed()) {
            DicatData d = load_instance(mut_opts);
            auto key = d2_from_name(target);
            if (!key) {
                std::cerr << "unknown mutation target " << target << "\n";
                return 2;
            }
            MutationSpec spec;
            spec.target = *key;
            spec.seed = noop ? 0 : (mut_seed == 0 ? 1 : mut_seed);
            spec.single_probe = single;
            spec.identity = noop;
            MutationOutcome out = mutate_and_check(d, default_axioms(), spec, run_config(mut_opts));
            ordered_json j = report_to_json(out.report);
            j["mutation"] = {{"target", d2_name(spec.target)},
                             {"seed", spec.seed},
                             {"detected", out.detected},
                             {"failed_axioms", out.failed_axioms},
                             {"failed_structure", out.failed_structure}};
            if (!mut_opts.report_path.empty()) {
                std::ofstream outf(mut_opts.report_path);
                outf << j.dump(2) << "\n";
            }
            if (mut_opts.format == "json")
                std::cout << j.dump(2) << "\n";
            else {
                std::cout << "mutation " << d2_name(spec.target)
                          << (out.detected ? " detected" : " undetected") << "\n";
                for (const auto& a : out.failed_axioms) std::cout << "  fails " << a << "\n";
                for (const auto& s : out.failed_structure)
                    std::cout << "  structural: " << s << "\n";
            }
            return out.detected ? 0 : 1;
        }
        if (val->parsed()) {
            std::ifstream in(validate_path);
            if (!in) {
                std::cerr << "cannot open " << validate_path << "\n";
                return 2;
            }
            ordered_json j = ordered_json::parse(in);
            std::string schema = j.value("schema", "");
            if (schema == "fincat/v1") {
                FinCatBundle b = fincat_from_json(j);
                bool ok = true;
                for (const auto& c : b.categories) {
                    auto rep = validate_category(c);
                    for (const auto& v : rep.violations) std::cout << c.name << ": " << v << "\n";
                    ok = ok && rep.ok;
                }
                std::map<std::string, const FinCategory*> cats;
                for (const auto& c : b.categories) cats[c.name] = &c;
                std::map<std::string, FunctorData> functors;
                for (const auto& f : b.functors) {
                    FunctorData fd;
                    fd.name = f.name;
                    if (!cats.count(f.source) || !cats.count(f.target)) {
                        std::cout << "functor " << f.name << " references unknown categories\n";
                        ok = false;
                        continue;
                    }
                    fd.source = cats[f.source];
                    fd.target = cats[f.target];
                    fd.object_map = f.objects;
                    fd.morphism_map = f.morphisms;
                    auto rep = validate_functor(fd);
                    for (const auto& v : rep.violations) std::cout << f.name << ": " << v << "\n";
                    ok = ok && rep.ok;
                    functors[f.name] = std::move(fd);
                }
                for (const auto& t : b.transformations) {
                    if (!functors.count(t.source_functor) || !functors.count(t.target_functor)) {
                        std::cout << "transformation " << t.name << " references unknown functors\n";
                        ok = false;
                        continue;
                    }
                    NatTransformData nd;
                    nd.name = t.name;
                    nd.source_functor = &functors[t.source_functor];
                    nd.target_functor = &functors[t.target_functor];
                    nd.components = t.components;
                    auto rep = validate_naturality(nd);
                    for (const auto& v : rep.violations) std::cout << t.name << ": " << v << "\n";
                    ok = ok && rep.ok;
                }
                std::cout << (ok ? "valid" : "invalid") << "\n";
                return ok ? 0 : 1;
            }
            if (schema == "dicat/v1") {
                DicatData d = DicatData::wrap(std::make_shared<FinCatOracle>(dicat_from_json(j)));
                for (const FinCategory* c :
                     {&static_cast<FinCatOracle*>(d.oracle.get())->data().c0,
                      &static_cast<FinCatOracle*>(d.oracle.get())->data().c1,
                      &static_cast<FinCatOracle*>(d.oracle.get())->data().c2}) {
                    auto rep = validate_category(*c);
                    for (const auto& v : rep.violations) std::cout << c->name << ": " << v << "\n";
                    if (!rep.ok) {
                        std::cout << "invalid\n";
                        return 1;
                    }
                }
                auto rep = validate_structure(d, val_tol, 4096);
                for (const auto& it : rep.items)
                    if (!it.ok) std::cout << it.item << ": " << it.detail << "\n";
                std::cout << (rep.ok ? "valid" : "invalid") << "\n";
                return rep.ok ? 0 : 1;
            }
            if (schema == "cocycle/v1") {
                CocycleInstance c = cocycle_from_json(j);
                auto rep = validate_group(c);
                for (const auto& v : rep.violations) std::cout << v << "\n";
                std::cout << (rep.ok ? "valid" : "invalid") << "\n";
                return rep.ok ? 0 : 1;
            }
            if (schema == "morita/v1") {
                MoritaConfig cfg;
                cfg.tol = val_tol;
                DicatData d = morita_from_json(j, cfg);
                auto rep = validate_structure(d, val_tol, 256);
                for (const auto& it : rep.items)
                    if (!it.ok) std::cout << it.item << ": " << it.detail << "\n";
                std::cout << (rep.ok ? "valid" : "invalid") << "\n";
                return rep.ok ? 0 : 1;
            }
            std::cerr << "unsupported schema '" << schema << "'\n";
            return 2;
        }
    } catch (const SchemaError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
