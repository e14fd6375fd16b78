#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dicat/expr.hpp"
#include "dicat/fincat_oracle.hpp"

using namespace dicat;

TEST_CASE("the shipped axiom file parses and type checks") {
    const auto& axs = default_axioms();
    CHECK(axs.size() == 46);
    // ids cover D3-1 .. D3-26
    for (int i = 1; i <= 26; ++i) {
        std::string base = "D3-" + std::to_string(i);
        bool found = false;
        for (const auto& a : axs)
            if (a.id == base || a.id.rfind(base, 0) == 0) found = true;
        CHECK_MESSAGE(found, base);
    }
    // every generator appears somewhere
    std::map<D2Key, int> used;
    std::function<void(const TExprPtr&)> scan = [&](const TExprPtr& e) {
        if (e->kind == TExpr::Kind::Gen) ++used[e->gen];
        for (const auto& c : e->children) scan(c);
    };
    for (const auto& a : axs) {
        scan(a.lhs);
        scan(a.rhs);
    }
    for (int i = 1; i <= 18; ++i) CHECK(used[static_cast<D2Key>(i)] > 0);
}

TEST_CASE("a matching equation parses into one definition") {
    auto axs = parse_axioms("(eq T1 (dom (1) ()) (wr (gen D2-1) (d1 iv)) (wr (gen D2-2) (d1 iv)) :cite \"x\")");
    REQUIRE(axs.size() == 1);
    CHECK(axs[0].id == "T1");
    CHECK(axs[0].cite == "x");
    CHECK(axs[0].dom.levels == std::vector<int>{1});
}

TEST_CASE("double inverse normalizes away") {
    TExprPtr e = t_inv(t_inv(t_gen(D2Key::VerticalAssociator)));
    TExprPtr n = normalize_texpr(e);
    CHECK(n->kind == TExpr::Kind::Gen);
    CHECK(n->gen == D2Key::VerticalAssociator);
    CHECK(texpr_str(n) == "(gen D2-3)");
}

TEST_CASE("whiskering by a functor with wrong endpoints is a type error") {
    // D2-12 lives over three 1-cells; feeding it 2-cells must fail
    std::string text =
        "(eq BAD (dom (2 2 2) (1 1)) (wr (gen D2-12) (tup (p 1) (p 2) (p 3))) "
        "(wr (gen D2-12) (tup (p 1) (p 2) (p 3))))";
    CHECK_THROWS_AS(parse_axioms(text), TypeError);
}

TEST_CASE("endpoint mismatch between the two sides is rejected with both endpoints named") {
    std::string text =
        "(eq BAD (dom (2) ()) (gen D2-1) (gen D2-2))";
    try {
        parse_axioms(text);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        std::string msg = e.what();
        CHECK(msg.find("mismatch") != std::string::npos);
    }
}

TEST_CASE("syntax errors carry a position") {
    try {
        parse_axioms("(eq D3 (dom (1) ()");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("offset") != std::string::npos);
    }
}

TEST_CASE("normalizer applies the strict source and target equations") {
    // s(w_r(H,E)) = m(s H, E) over the dewhisker domain
    Dom dom{{2, 1}, {0}};
    auto f = f_of({f_s(), f_of({f_d1(D1Key::WR), f_tup({f_proj(1), f_proj(2)})})});
    auto n = normalize_functor(f, dom);
    REQUIRE(n.size() == 1);
    CHECK(n[0].str() == "m(s(p1),p2)");
}

TEST_CASE("normalizer rewrites chain links to the earlier component") {
    // in a vertically linked pair, s(p2) = t(p1)
    Dom dom{{2, 2}, {1}};
    auto n = normalize_functor(f_of({f_s(), f_proj(2)}), dom);
    CHECK(n[0].str() == "t(p1)");
    // globularity folds t.t to t.s
    auto n2 = normalize_functor(f_of({f_t(), f_t(), f_proj(2)}), dom);
    CHECK(n2[0].str() == "t(s(p1))");
}

TEST_CASE("evaluation is compositional on the trivial instance") {
    auto d = build_trivial_instance();
    const auto& o = *d.oracle;
    // evaluate(vc(a,b)) equals compose of the evaluations, exactly
    Dom dom{{2}, {}};
    auto probes = enumerate_probes(o, dom, 8);
    REQUIRE(!probes.empty());
    auto a = t_gen(D2Key::TopIdentity);
    auto binv = t_inv(t_gen(D2Key::TopIdentity));
    auto both = t_vc({binv, a});
    for (const auto& p : probes) {
        MorHandle va = evaluate(o, a, p);
        MorHandle vb = evaluate(o, binv, p);
        MorHandle vc_ = evaluate(o, both, p);
        CHECK(o.equal_residual(vc_, o.compose(vb, va)) == 0.0);
    }
}

TEST_CASE("identity expressions evaluate to identities; eta . inv(eta) is the identity") {
    auto d = build_trivial_instance();
    const auto& o = *d.oracle;
    Dom dom{{2}, {}};
    auto probes = enumerate_probes(o, dom, 8);
    auto idexpr = t_id(f_id());
    for (const auto& p : probes) {
        CHECK(o.equal_residual(evaluate(o, idexpr, p), o.identity(p.h)) == 0.0);
        auto eta = t_gen(D2Key::TopIdentity);
        auto round = t_vc({eta, t_inv(eta)});
        MorHandle r = evaluate(o, round, p);
        MorHandle src = evaluate(o, t_id(f_of({f_d1(D1Key::MV),
                                               f_tup({f_of({f_d1(D1Key::IV), f_s()}), f_id()})})),
                                 p);
        CHECK(o.equal_residual(r, src) == 0.0);
    }
}
