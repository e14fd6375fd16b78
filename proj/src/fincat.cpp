#include "dicat/fincat.hpp"

#include <algorithm>
#include <set>

namespace dicat {

const FinCategory::Mor* FinCategory::find_mor(const std::string& id) const {
    for (const auto& m : morphisms)
        if (m.id == id) return &m;
    return nullptr;
}

bool FinCategory::has_object(const std::string& id) const {
    return std::find(objects.begin(), objects.end(), id) != objects.end();
}

std::optional<std::string> FinCategory::compose2(const std::string& f, const std::string& g) const {
    auto it = compose.find({f, g});
    if (it == compose.end()) return std::nullopt;
    return it->second;
}

std::string FinCategory::identity_of(const std::string& obj) const {
    auto it = identities.find(obj);
    return it == identities.end() ? std::string() : it->second;
}

bool FinCategory::is_iso(const std::string& f) const {
    const Mor* m = find_mor(f);
    if (!m) return false;
    for (const auto& g : morphisms) {
        if (g.src != m->dst || g.dst != m->src) continue;
        auto fg = compose2(f, g.id);
        auto gf = compose2(g.id, f);
        if (fg && gf && *fg == identity_of(m->src) && *gf == identity_of(m->dst)) return true;
    }
    return false;
}

ValidationReport validate_category(const FinCategory& c) {
    ValidationReport rep;
    std::set<std::string> obj_set(c.objects.begin(), c.objects.end());
    if (obj_set.size() != c.objects.size()) rep.fail("duplicate object ids");
    std::set<std::string> mor_ids;
    for (const auto& m : c.morphisms) {
        if (!mor_ids.insert(m.id).second) rep.fail("duplicate morphism id " + m.id);
        if (!obj_set.count(m.src)) rep.fail("morphism " + m.id + " has unknown src " + m.src);
        if (!obj_set.count(m.dst)) rep.fail("morphism " + m.id + " has unknown dst " + m.dst);
    }
    // identities exist and are neutral
    for (const auto& o : c.objects) {
        const std::string idm = c.identity_of(o);
        const auto* m = c.find_mor(idm);
        if (!m || m->src != o || m->dst != o) {
            rep.fail("missing or ill-typed identity for object " + o);
            continue;
        }
    }
    // composition total on composable pairs, endpoints consistent
    for (const auto& f : c.morphisms) {
        for (const auto& g : c.morphisms) {
            const bool composable = f.dst == g.src;
            auto fg = c.compose2(f.id, g.id);
            if (composable && !fg) rep.fail("composition undefined for (" + f.id + "," + g.id + ")");
            if (!composable && fg) rep.fail("composition defined for non-composable (" + f.id + "," + g.id + ")");
            if (composable && fg) {
                const auto* h = c.find_mor(*fg);
                if (!h)
                    rep.fail("composite of (" + f.id + "," + g.id + ") is unknown morphism " + *fg);
                else if (h->src != f.src || h->dst != g.dst)
                    rep.fail("composite of (" + f.id + "," + g.id + ") has wrong endpoints");
            }
        }
    }
    // identity laws
    for (const auto& f : c.morphisms) {
        auto l = c.compose2(c.identity_of(f.src), f.id);
        auto r = c.compose2(f.id, c.identity_of(f.dst));
        if (!l || *l != f.id) rep.fail("left identity law fails for " + f.id);
        if (!r || *r != f.id) rep.fail("right identity law fails for " + f.id);
    }
    // associativity, exhaustively over composable triples
    for (const auto& f : c.morphisms)
        for (const auto& g : c.morphisms) {
            if (f.dst != g.src) continue;
            auto fg = c.compose2(f.id, g.id);
            if (!fg) continue;
            for (const auto& h : c.morphisms) {
                if (g.dst != h.src) continue;
                auto gh = c.compose2(g.id, h.id);
                if (!gh) continue;
                auto left = c.compose2(*fg, h.id);
                auto right = c.compose2(f.id, *gh);
                if (!left || !right || *left != *right)
                    rep.fail("associativity fails at (" + f.id + "," + g.id + "," + h.id + ")");
            }
        }
    return rep;
}

std::string FunctorData::on_object(const std::string& o) const {
    auto it = object_map.find(o);
    return it == object_map.end() ? std::string() : it->second;
}

std::string FunctorData::on_morphism(const std::string& f) const {
    auto it = morphism_map.find(f);
    return it == morphism_map.end() ? std::string() : it->second;
}

ValidationReport validate_functor(const FunctorData& f) {
    ValidationReport rep;
    if (!f.source || !f.target) {
        rep.fail("functor missing endpoint categories");
        return rep;
    }
    for (const auto& o : f.source->objects) {
        if (!f.target->has_object(f.on_object(o)))
            rep.fail("object " + o + " mapped outside target");
    }
    for (const auto& m : f.source->morphisms) {
        const auto* im = f.target->find_mor(f.on_morphism(m.id));
        if (!im) {
            rep.fail("morphism " + m.id + " mapped outside target");
            continue;
        }
        if (im->src != f.on_object(m.src) || im->dst != f.on_object(m.dst))
            rep.fail("functor breaks endpoints on " + m.id);
    }
    for (const auto& o : f.source->objects) {
        if (f.on_morphism(f.source->identity_of(o)) != f.target->identity_of(f.on_object(o)))
            rep.fail("functor breaks identity at " + o);
    }
    for (const auto& [pair, comp] : f.source->compose) {
        auto img = f.target->compose2(f.on_morphism(pair.first), f.on_morphism(pair.second));
        if (!img || *img != f.on_morphism(comp))
            rep.fail("functor breaks composition at (" + pair.first + "," + pair.second + ")");
    }
    return rep;
}

ValidationReport validate_naturality(const NatTransformData& n) {
    ValidationReport rep;
    if (!n.source_functor || !n.target_functor) {
        rep.fail("transformation missing functors");
        return rep;
    }
    const FunctorData& F = *n.source_functor;
    const FunctorData& G = *n.target_functor;
    if (F.source != G.source || F.target != G.target) {
        rep.fail("transformation endpoints differ");
        return rep;
    }
    const FinCategory& C = *F.source;
    const FinCategory& D = *F.target;
    for (const auto& o : C.objects) {
        auto it = n.components.find(o);
        if (it == n.components.end()) {
            rep.fail("missing component at " + o);
            continue;
        }
        const auto* m = D.find_mor(it->second);
        if (!m || m->src != F.on_object(o) || m->dst != G.on_object(o))
            rep.fail("component at " + o + " has wrong endpoints");
    }
    if (!rep.ok) return rep;
    for (const auto& f : C.morphisms) {
        // G(f) . eta_src == eta_dst . F(f)   (diagrammatic order)
        auto left = D.compose2(n.components.at(f.src), G.on_morphism(f.id));
        auto right = D.compose2(F.on_morphism(f.id), n.components.at(f.dst));
        if (!left || !right || *left != *right)
            rep.fail("naturality square fails at morphism " + f.id);
    }
    return rep;
}

std::string pair_id(const std::string& a, const std::string& b) { return "(" + a + "|" + b + ")"; }

FiberProductResult fiber_product(const FunctorData& f, const FunctorData& g) {
    FiberProductResult out;
    if (f.target != g.target) throw std::runtime_error("fiber_product: functors must share target");
    const FinCategory& A = *f.source;
    const FinCategory& B = *g.source;
    FinCategory& P = out.category;
    P.name = A.name + "x" + B.name;
    for (const auto& a : A.objects)
        for (const auto& b : B.objects)
            if (f.on_object(a) == g.on_object(b)) P.objects.push_back(pair_id(a, b));
    for (const auto& ma : A.morphisms)
        for (const auto& mb : B.morphisms)
            if (f.on_morphism(ma.id) == g.on_morphism(mb.id) &&
                f.on_object(ma.src) == g.on_object(mb.src) &&
                f.on_object(ma.dst) == g.on_object(mb.dst))
                P.morphisms.push_back({pair_id(ma.id, mb.id), pair_id(ma.src, mb.src), pair_id(ma.dst, mb.dst)});
    for (const auto& a : A.objects)
        for (const auto& b : B.objects)
            if (f.on_object(a) == g.on_object(b))
                P.identities[pair_id(a, b)] = pair_id(A.identity_of(a), B.identity_of(b));
    for (const auto& m1 : P.morphisms)
        for (const auto& m2 : P.morphisms) {
            if (m1.dst != m2.src) continue;
            // decompose pair ids
            auto split = [](const std::string& s) {
                auto bar = s.find('|');
                return std::pair<std::string, std::string>(s.substr(1, bar - 1),
                                                           s.substr(bar + 1, s.size() - bar - 2));
            };
            auto [a1, b1] = split(m1.id);
            auto [a2, b2] = split(m2.id);
            auto ca = A.compose2(a1, a2);
            auto cb = B.compose2(b1, b2);
            if (ca && cb) P.compose[{m1.id, m2.id}] = pair_id(*ca, *cb);
        }
    out.proj1.name = "p1";
    out.proj1.source = &out.category;
    out.proj1.target = f.source;
    out.proj2.name = "p2";
    out.proj2.source = &out.category;
    out.proj2.target = g.source;
    auto split = [](const std::string& s) {
        auto bar = s.find('|');
        return std::pair<std::string, std::string>(s.substr(1, bar - 1),
                                                   s.substr(bar + 1, s.size() - bar - 2));
    };
    for (const auto& o : P.objects) {
        auto [a, b] = split(o);
        out.proj1.object_map[o] = a;
        out.proj2.object_map[o] = b;
    }
    for (const auto& m : P.morphisms) {
        auto [a, b] = split(m.id);
        out.proj1.morphism_map[m.id] = a;
        out.proj2.morphism_map[m.id] = b;
    }
    return out;
}

FunctorData compose_functors(const FunctorData& f, const FunctorData& g) {
    if (g.target != f.source) throw std::runtime_error("compose_functors: endpoint mismatch");
    FunctorData h;
    h.name = f.name + "." + g.name;
    h.source = g.source;
    h.target = f.target;
    for (const auto& [o, img] : g.object_map) h.object_map[o] = f.on_object(img);
    for (const auto& [m, img] : g.morphism_map) h.morphism_map[m] = f.on_morphism(img);
    return h;
}

FunctorData identity_functor(const FinCategory& c) {
    FunctorData f;
    f.name = "id_" + c.name;
    f.source = &c;
    f.target = &c;
    for (const auto& o : c.objects) f.object_map[o] = o;
    for (const auto& m : c.morphisms) f.morphism_map[m.id] = m.id;
    return f;
}

NatTransformData whisker_left(const FunctorData& f, const NatTransformData& eta) {
    if (eta.source_functor->target != f.source)
        throw std::runtime_error("whisker_left: endpoint mismatch");
    NatTransformData out;
    out.name = f.name + "." + eta.name;
    out.owned_source = std::make_shared<FunctorData>(compose_functors(f, *eta.source_functor));
    out.owned_target = std::make_shared<FunctorData>(compose_functors(f, *eta.target_functor));
    out.source_functor = out.owned_source.get();
    out.target_functor = out.owned_target.get();
    for (const auto& [o, comp] : eta.components) out.components[o] = f.on_morphism(comp);
    return out;
}

NatTransformData whisker_right(const NatTransformData& eta, const FunctorData& f) {
    if (f.target != eta.source_functor->source)
        throw std::runtime_error("whisker_right: endpoint mismatch");
    NatTransformData out;
    out.name = eta.name + "." + f.name;
    out.owned_source = std::make_shared<FunctorData>(compose_functors(*eta.source_functor, f));
    out.owned_target = std::make_shared<FunctorData>(compose_functors(*eta.target_functor, f));
    out.source_functor = out.owned_source.get();
    out.target_functor = out.owned_target.get();
    for (const auto& o : f.source->objects) out.components[o] = eta.components.at(f.on_object(o));
    return out;
}

NatTransformData vcompose(const NatTransformData& eta, const NatTransformData& theta) {
    NatTransformData out;
    out.name = eta.name + ";" + theta.name;
    out.source_functor = eta.source_functor;
    out.target_functor = theta.target_functor;
    out.owned_source = eta.owned_source;
    out.owned_target = theta.owned_target;
    const FinCategory& D = *eta.source_functor->target;
    for (const auto& [o, comp] : eta.components) {
        auto c = D.compose2(comp, theta.components.at(o));
        if (!c) throw std::runtime_error("vcompose: components not composable at " + o);
        out.components[o] = *c;
    }
    return out;
}

NatTransformData hcompose(const NatTransformData& eta, const NatTransformData& theta) {
    // eta : F => G : A -> B,  theta : H => K : B -> C
    // (theta * eta)_a = K(eta_a) . theta_{F a}    (standard formula)
    NatTransformData out;
    out.name = theta.name + "*" + eta.name;
    out.owned_source =
        std::make_shared<FunctorData>(compose_functors(*theta.source_functor, *eta.source_functor));
    out.owned_target =
        std::make_shared<FunctorData>(compose_functors(*theta.target_functor, *eta.target_functor));
    out.source_functor = out.owned_source.get();
    out.target_functor = out.owned_target.get();
    const FinCategory& C = *theta.source_functor->target;
    const FunctorData& K = *theta.target_functor;
    const FunctorData& F = *eta.source_functor;
    for (const auto& [a, comp] : eta.components) {
        auto c = C.compose2(theta.components.at(F.on_object(a)), K.on_morphism(comp));
        if (!c) throw std::runtime_error("hcompose: components not composable at " + a);
        out.components[a] = *c;
    }
    return out;
}

IsofibrationReport isofibration_check(const FunctorData& f) {
    IsofibrationReport rep;
    const FinCategory& E = *f.source;
    const FinCategory& B = *f.target;
    for (const auto& phi : B.morphisms) {
        if (!B.is_iso(phi.id)) continue;
        for (const auto& e : E.objects) {
            if (f.on_object(e) != phi.src) continue;
            bool lifted = false;
            for (const auto& psi : E.morphisms) {
                if (psi.src != e) continue;
                if (!E.is_iso(psi.id)) continue;
                if (f.on_morphism(psi.id) == phi.id) {
                    lifted = true;
                    break;
                }
            }
            if (!lifted) {
                rep.ok = false;
                rep.unliftable.push_back({phi.id, e});
            }
        }
    }
    return rep;
}

}  // namespace dicat
