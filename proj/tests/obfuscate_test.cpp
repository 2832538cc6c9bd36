#include "fxa/obfuscate.hpp"
#include "fxa/parser.hpp"
#include "fxa/stats.hpp"
#include "fxa/typecheck.hpp"

#include <doctest.h>

using namespace fxa;

namespace {

TypePtr union_example() {
    // union { struct { int a; float b[2]; }; double c[2]; }
    TypedUnit u = typecheck_source(
        "int f() { union { struct { int a; float b[2]; }; double c[2]; } u; "
        "u.a = 1; return u.a; }");
    return u.unit.functions[0].body->stmts[0]->decl_type;
}

} // namespace

TEST_CASE("fresh offsets are full range, deterministic and uniform") {
    OffsetRng a(42, 8), b(42, 8);
    for (int i = 0; i < 1000; ++i) CHECK(a.word() == b.word());

    OffsetRng zero(42, 8, true);
    for (int i = 0; i < 100; ++i) CHECK(zero.word() == 0);

    // chi-square against uniform over 256 bins at alpha=0.001
    OffsetRng r(7, 8);
    std::vector<std::uint32_t> draws;
    for (int i = 0; i < 100000; ++i) draws.push_back(static_cast<std::uint32_t>(r.word()));
    Chi2Result res = uniformity_test(draws, 256, 0.001);
    CHECK(res.pass);
}

TEST_CASE("scheme get/set are functional") {
    Scheme d;
    d.set(Loc::reg(5), SchemeEntry{10, false, false, 1});
    Scheme fork = d;
    fork.set(Loc::reg(5), SchemeEntry{20, false, false, 2});
    fork.set(Loc::slot(3), SchemeEntry{30, false, false, 3});
    CHECK(d.get(Loc::reg(5)).delta == 10);
    CHECK(fork.get(Loc::reg(5)).delta == 20);
    CHECK(!d.contains(Loc::slot(3)));
    CHECK_THROWS(d.get(Loc::slot(99)));
}

TEST_CASE("union unification matches the worked example") {
    TypePtr u = union_example();
    REQUIRE(u->cells() == 4);

    OffsetClassSet per_entry = unify_union(u, ArrayMode::PerEntry);
    // alpha, beta, gamma, delta: every cell its own class
    CHECK(per_entry.class_count == 4);
    CHECK(per_entry.class_of[0] != per_entry.class_of[1]);
    CHECK(per_entry.class_of[1] != per_entry.class_of[2]);
    CHECK(per_entry.class_of[2] != per_entry.class_of[3]);

    OffsetClassSet shared = unify_union(u, ArrayMode::Shared);
    CHECK(shared.class_count == 1);
    for (int c : shared.class_of) CHECK(c == 0);
}

TEST_CASE("single-member union is one class") {
    TypedUnit u = typecheck_source("int f() { union { int x; } v; v.x = 1; return v.x; }");
    TypePtr t = u.unit.functions[0].body->stmts[0]->decl_type;
    OffsetClassSet cs = unify_union(t, ArrayMode::PerEntry);
    CHECK(cs.class_count == 1);
}

TEST_CASE("unify is order independent and idempotent") {
    TypePtr u = union_example();
    OffsetClassSet a = unify_union(u, ArrayMode::Shared);
    OffsetClassSet b = unify_union(u, ArrayMode::Shared);
    CHECK(a.class_of == b.class_of);

    auto reversed = std::make_shared<Type>();
    reversed->kind = Type::K::Union;
    reversed->fields = {u->fields[1], u->fields[0]};
    OffsetClassSet c = unify_union(reversed, ArrayMode::Shared);
    CHECK(c.class_count == a.class_count);
}

TEST_CASE("joins report adjustments per path and agree afterwards") {
    OffsetRng rng(5, 8);
    Scheme a, b;
    a.set(Loc::reg(4), SchemeEntry{3, false, false, 1});
    b.set(Loc::reg(4), SchemeEntry{9, false, false, 2});
    a.set(Loc::reg(5), SchemeEntry{7, false, false, 1});
    b.set(Loc::reg(5), SchemeEntry{7, false, false, 1});

    // nothing written: empty adjustments, schemes keep their entries
    JoinResult none = join_schemes({a, a}, {}, rng);
    CHECK(none.per_path[0].empty());
    CHECK(none.target.get(Loc::reg(4)).delta == 3);

    // reg4 written on both paths with different deltas
    JoinResult j = join_schemes({a, b}, {Loc::reg(4)}, rng);
    CHECK(j.per_path[0].size() == 1);
    CHECK(j.per_path[1].size() == 1);
    CHECK(j.per_path[0][0].from_delta == 3);
    CHECK(j.per_path[1][0].from_delta == 9);
    // untouched location keeps the common offset
    CHECK(j.target.get(Loc::reg(5)).delta == 7);

    // forced target (loop back edge)
    JoinResult loop = join_schemes({b}, {Loc::reg(4)}, rng, &a);
    CHECK(loop.target.get(Loc::reg(4)).delta == 3);
    CHECK(loop.per_path[0][0].from_delta == 9);

    CHECK_THROWS(join_schemes({a, Scheme{}}, {}, rng));
}
