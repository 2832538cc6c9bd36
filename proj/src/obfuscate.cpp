#include "fxa/obfuscate.hpp"

#include "fxa/wordops.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>

namespace fxa {

namespace {

std::uint64_t splitmix(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ull;
    std::uint64_t x = s;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

} // namespace

OffsetRng::OffsetRng(std::uint64_t seed, int width, bool zero)
    : state_(seed ^ 0x5bf0a8b1357924b1ull), mask_(wordops::mask_bits(width)), zero_(zero) {
    // a few warmup draws decorrelate small seeds
    splitmix(state_);
    splitmix(state_);
}

Word OffsetRng::word() {
    if (zero_) return 0;
    return splitmix(state_) & mask_;
}

bool OffsetRng::coin() {
    if (zero_) return false;
    return splitmix(state_) & 1;
}

std::uint64_t OffsetRng::wide(int cells) {
    const int width = std::popcount(mask_);
    std::uint64_t v = 0;
    for (int i = 0; i < cells; ++i) v = (v << width) | word();
    return v;
}

const SchemeEntry& Scheme::get(const Loc& l) const {
    auto it = map_.find(l);
    if (it == map_.end()) throw std::runtime_error("scheme: unknown location");
    return it->second;
}

const SchemeEntry* Scheme::find(const Loc& l) const {
    auto it = map_.find(l);
    return it == map_.end() ? nullptr : &it->second;
}

void Scheme::set(const Loc& l, SchemeEntry e) { map_[l] = e; }
void Scheme::erase(const Loc& l) { map_.erase(l); }

std::vector<std::vector<int>> OffsetClassSet::classes() const {
    std::vector<std::vector<int>> out(class_count);
    for (size_t i = 0; i < class_of.size(); ++i) out[class_of[i]].push_back(static_cast<int>(i));
    return out;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
    void merge(int a, int b) { parent[find(a)] = find(b); }
};

// Walks a member layout starting at `base`, merging cells that a shared
// array offset scheme forces together. Scalar pairs keep two independent
// offsets, so array sharing is componentwise over element cells.
void collect_constraints(const TypePtr& t, int base, ArrayMode mode, UnionFind& uf) {
    switch (t->kind) {
        case Type::K::Base:
        case Type::K::Pointer:
            break;
        case Type::K::Array: {
            int stride = t->elem->cells();
            for (int i = 0; i < t->array_len; ++i)
                collect_constraints(t->elem, base + i * stride, mode, uf);
            if (mode == ArrayMode::Shared) {
                for (int i = 1; i < t->array_len; ++i)
                    for (int c = 0; c < stride; ++c)
                        uf.merge(base + c, base + i * stride + c);
            }
            break;
        }
        case Type::K::Struct: {
            int off = 0;
            for (const auto& f : t->fields) {
                collect_constraints(f.type, base + off, mode, uf);
                off += f.type->cells();
            }
            break;
        }
        case Type::K::Union: {
            for (const auto& f : t->fields) collect_constraints(f.type, base, mode, uf);
            break;
        }
    }
}

} // namespace

OffsetClassSet unify_union(const TypePtr& union_type, ArrayMode mode) {
    if (union_type->kind != Type::K::Union)
        throw std::invalid_argument("unify_union needs a union type");
    const int n = union_type->cells();
    UnionFind uf(n);
    // all members overlay the same cells starting at 0; cell identity is the
    // only cross-member constraint, array sharing adds intra-member ones
    for (const auto& f : union_type->fields) collect_constraints(f.type, 0, mode, uf);

    OffsetClassSet out;
    out.class_of.assign(n, -1);
    for (int i = 0; i < n; ++i) {
        int root = uf.find(i);
        if (out.class_of[root] == -1) out.class_of[root] = out.class_count++;
        out.class_of[i] = out.class_of[root];
    }
    return out;
}

JoinResult join_schemes(const std::vector<Scheme>& paths,
                        const std::vector<Loc>& sync_locs, OffsetRng& rng,
                        const Scheme* forced_target) {
    if (paths.empty()) throw std::invalid_argument("join_schemes needs paths");
    const Scheme& first = paths.front();
    for (const Scheme& p : paths) {
        if (p.entries().size() != first.entries().size())
            throw std::invalid_argument("join_schemes: mismatched live sets");
        for (const auto& [loc, entry] : p.entries()) {
            (void)entry;
            if (!first.contains(loc))
                throw std::invalid_argument("join_schemes: mismatched live sets");
        }
    }

    JoinResult res;
    res.per_path.resize(paths.size());
    res.target = first;
    for (const Loc& loc : sync_locs) {
        SchemeEntry target;
        if (forced_target) {
            target = forced_target->get(loc);
        } else {
            target.delta = rng.word();
            target.bool_coded = first.get(loc).bool_coded;
            // the sense coin exists only for boolean-coded cells, so the
            // draw count is the same for every seed
            target.parity = target.bool_coded ? rng.coin() : false;
        }
        res.target.set(loc, target);
        for (size_t i = 0; i < paths.size(); ++i) {
            const SchemeEntry& e = paths[i].get(loc);
            res.per_path[i].push_back({loc, e.delta, e.parity});
        }
    }
    return res;
}

} // namespace fxa
