#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dicat/fincat.hpp"

using namespace dicat;

namespace {

FinCategory one_object_one_morphism() {
    FinCategory c;
    c.name = "pt";
    c.objects = {"x"};
    c.morphisms = {{"1x", "x", "x"}};
    c.compose[{"1x", "1x"}] = "1x";
    c.identities["x"] = "1x";
    return c;
}

FinCategory arrow_category() {
    FinCategory c;
    c.name = "arrow";
    c.objects = {"a", "b"};
    c.morphisms = {{"1a", "a", "a"}, {"1b", "b", "b"}, {"f", "a", "b"}};
    c.identities["a"] = "1a";
    c.identities["b"] = "1b";
    c.compose[{"1a", "1a"}] = "1a";
    c.compose[{"1b", "1b"}] = "1b";
    c.compose[{"1a", "f"}] = "f";
    c.compose[{"f", "1b"}] = "f";
    return c;
}

// contractible groupoid on two objects
FinCategory contractible_pair() {
    FinCategory c;
    c.name = "pair";
    c.objects = {"a", "b"};
    c.morphisms = {{"1a", "a", "a"}, {"1b", "b", "b"}, {"u", "a", "b"}, {"v", "b", "a"}};
    c.identities["a"] = "1a";
    c.identities["b"] = "1b";
    auto cmp = [&](const std::string& f, const std::string& g, const std::string& h) {
        c.compose[{f, g}] = h;
    };
    cmp("1a", "1a", "1a");
    cmp("1b", "1b", "1b");
    cmp("1a", "u", "u");
    cmp("u", "1b", "u");
    cmp("1b", "v", "v");
    cmp("v", "1a", "v");
    cmp("u", "v", "1a");
    cmp("v", "u", "1b");
    return c;
}

FinCategory discrete_pair() {
    FinCategory c;
    c.name = "disc";
    c.objects = {"a", "b"};
    c.morphisms = {{"1a", "a", "a"}, {"1b", "b", "b"}};
    c.identities["a"] = "1a";
    c.identities["b"] = "1b";
    c.compose[{"1a", "1a"}] = "1a";
    c.compose[{"1b", "1b"}] = "1b";
    return c;
}

}  // namespace

TEST_CASE("one object one morphism category validates") {
    CHECK(validate_category(one_object_one_morphism()).ok);
}

TEST_CASE("planted associativity defect is reported with the offending triple") {
    FinCategory c;
    c.name = "cycle";
    c.objects = {"x"};
    c.morphisms = {{"1x", "x", "x"}, {"f", "x", "x"}, {"g", "x", "x"}, {"h", "x", "x"}};
    c.identities["x"] = "1x";
    for (const std::string m : {"1x", "f", "g", "h"}) {
        c.compose[{"1x", m}] = m;
        c.compose[{m, "1x"}] = m;
    }
    c.compose[{"f", "f"}] = "g";
    c.compose[{"f", "g"}] = "g";  // planted break (true cyclic value is h)
    c.compose[{"f", "h"}] = "1x";
    c.compose[{"g", "f"}] = "h";
    c.compose[{"g", "g"}] = "1x";
    c.compose[{"g", "h"}] = "f";
    c.compose[{"h", "f"}] = "1x";
    c.compose[{"h", "g"}] = "f";
    c.compose[{"h", "h"}] = "g";
    auto rep = validate_category(c);
    CHECK_FALSE(rep.ok);
    bool names_triple = false;
    for (const auto& v : rep.violations)
        if (v.find("associativity") != std::string::npos) names_triple = true;
    CHECK(names_triple);
}

TEST_CASE("missing composite is reported") {
    FinCategory c = arrow_category();
    c.compose.erase({"1a", "f"});
    CHECK_FALSE(validate_category(c).ok);
}

TEST_CASE("fiber product over the terminal category is the binary product") {
    FinCategory pt = one_object_one_morphism();
    FinCategory a = arrow_category();
    FinCategory b = discrete_pair();
    FunctorData fa, fb;
    fa.source = &a;
    fa.target = &pt;
    for (const auto& o : a.objects) fa.object_map[o] = "x";
    for (const auto& m : a.morphisms) fa.morphism_map[m.id] = "1x";
    fb.source = &b;
    fb.target = &pt;
    for (const auto& o : b.objects) fb.object_map[o] = "x";
    for (const auto& m : b.morphisms) fb.morphism_map[m.id] = "1x";
    REQUIRE(validate_functor(fa).ok);
    REQUIRE(validate_functor(fb).ok);
    auto fp = fiber_product(fa, fb);
    CHECK(fp.category.objects.size() == a.objects.size() * b.objects.size());
    CHECK(validate_category(fp.category).ok);
    CHECK(validate_functor(fp.proj1).ok);
    CHECK(validate_functor(fp.proj2).ok);
    for (const auto& o : fp.category.objects)
        CHECK(fa.on_object(fp.proj1.on_object(o)) == fb.on_object(fp.proj2.on_object(o)));
}

TEST_CASE("fiber product along identities has the same object count") {
    FinCategory a = arrow_category();
    FunctorData ida = identity_functor(a);
    auto fp = fiber_product(ida, ida);
    CHECK(fp.category.objects.size() == a.objects.size());
    CHECK(fp.category.morphisms.size() == a.morphisms.size());
}

TEST_CASE("fiber product object count matches brute-force pairing") {
    FinCategory base;
    base.name = "base3";
    base.objects = {"p", "q", "r"};
    for (const auto& o : base.objects) {
        base.morphisms.push_back({"1" + o, o, o});
        base.identities[o] = "1" + o;
        base.compose[{"1" + o, "1" + o}] = "1" + o;
    }
    FinCategory c = discrete_pair();
    FinCategory d = discrete_pair();
    FunctorData f, g;
    f.source = &c;
    f.target = &base;
    f.object_map = {{"a", "p"}, {"b", "q"}};
    f.morphism_map = {{"1a", "1p"}, {"1b", "1q"}};
    g.source = &d;
    g.target = &base;
    g.object_map = {{"a", "q"}, {"b", "q"}};
    g.morphism_map = {{"1a", "1q"}, {"1b", "1q"}};
    std::size_t expected = 0;
    for (const auto& x : c.objects)
        for (const auto& y : d.objects)
            if (f.on_object(x) == g.on_object(y)) ++expected;
    auto fp = fiber_product(f, g);
    CHECK(fp.category.objects.size() == expected);
    CHECK(expected == 2);
}

TEST_CASE("whisker with identity functor changes nothing") {
    FinCategory a = arrow_category();
    FunctorData ida = identity_functor(a);
    NatTransformData eta;
    eta.name = "eta";
    eta.source_functor = &ida;
    eta.target_functor = &ida;
    for (const auto& o : a.objects) eta.components[o] = a.identity_of(o);
    REQUIRE(validate_naturality(eta).ok);
    auto w = whisker_left(ida, eta);
    CHECK(w.components == eta.components);
    auto w2 = whisker_right(eta, ida);
    CHECK(w2.components == eta.components);
}

TEST_CASE("vcompose of a transformation with its inverse is the identity") {
    FinCategory c = contractible_pair();
    FunctorData idc = identity_functor(c);
    FunctorData ca;
    ca.name = "const_a";
    ca.source = &c;
    ca.target = &c;
    for (const auto& o : c.objects) ca.object_map[o] = "a";
    for (const auto& m : c.morphisms) ca.morphism_map[m.id] = "1a";
    REQUIRE(validate_functor(ca).ok);
    NatTransformData eta;
    eta.source_functor = &idc;
    eta.target_functor = &ca;
    eta.components = {{"a", "1a"}, {"b", "v"}};
    REQUIRE(validate_naturality(eta).ok);
    NatTransformData inv;
    inv.source_functor = &ca;
    inv.target_functor = &idc;
    inv.components = {{"a", "1a"}, {"b", "u"}};
    REQUIRE(validate_naturality(inv).ok);
    auto round = vcompose(eta, inv);
    for (const auto& o : c.objects) CHECK(round.components.at(o) == c.identity_of(o));
}

TEST_CASE("interchange of horizontal and vertical composition on a seeded example") {
    FinCategory c = contractible_pair();
    FunctorData idc = identity_functor(c);
    FunctorData ca;
    ca.name = "const_a";
    ca.source = &c;
    ca.target = &c;
    for (const auto& o : c.objects) ca.object_map[o] = "a";
    for (const auto& m : c.morphisms) ca.morphism_map[m.id] = "1a";
    NatTransformData eta;  // id => const_a
    eta.source_functor = &idc;
    eta.target_functor = &ca;
    eta.components = {{"a", "1a"}, {"b", "v"}};
    NatTransformData theta = eta;
    NatTransformData id_id;
    id_id.source_functor = &idc;
    id_id.target_functor = &idc;
    id_id.components = {{"a", "1a"}, {"b", "1b"}};
    NatTransformData id_ca;
    id_ca.source_functor = &ca;
    id_ca.target_functor = &ca;
    id_ca.components = {{"a", "1a"}, {"b", "1a"}};
    // interchange: (id_ca . eta) * (id_ca . theta) computed either way
    auto lhs = hcompose(vcompose(eta, id_ca), vcompose(theta, id_ca));
    auto rhs = vcompose(hcompose(eta, theta), hcompose(id_ca, id_ca));
    CHECK(lhs.components == rhs.components);
}

TEST_CASE("isofibration: identity functor passes") {
    FinCategory c = contractible_pair();
    CHECK(isofibration_check(identity_functor(c)).ok);
}

TEST_CASE("isofibration: discrete over contractible fails at the cross isomorphisms") {
    FinCategory e = discrete_pair();
    FinCategory b = contractible_pair();
    FunctorData f;
    f.source = &e;
    f.target = &b;
    f.object_map = {{"a", "a"}, {"b", "b"}};
    f.morphism_map = {{"1a", "1a"}, {"1b", "1b"}};
    REQUIRE(validate_functor(f).ok);
    auto rep = isofibration_check(f);
    CHECK_FALSE(rep.ok);
    CHECK(rep.unliftable.size() == 2);
}

TEST_CASE("isofibration: projection of a product groupoid passes") {
    FinCategory b = contractible_pair();
    FunctorData idb = identity_functor(b);
    auto fp = fiber_product(idb, idb);
    CHECK(isofibration_check(fp.proj1).ok);
}
