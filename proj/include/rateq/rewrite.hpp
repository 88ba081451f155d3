#ifndef RATEQ_REWRITE_HPP
#define RATEQ_REWRITE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "graph.hpp"
#include "match.hpp"

namespace rateq {

/// Rewrite rule as a span of monos  L <- K -> R  (a partial graph morphism
/// L -> R whose domain of definition is K).
class Rule {
public:
    Rule() = default;
    Rule(Graph lhs, Graph rhs, Graph ker, Morphism left_leg, Morphism right_leg,
         std::uint32_t uid = 0, std::string name = {})
        : lhs_(std::move(lhs)), rhs_(std::move(rhs)), ker_(std::move(ker)),
          left_leg_(std::move(left_leg)), right_leg_(std::move(right_leg)),
          uid_(uid), name_(std::move(name)) {
        if (!(left_leg_.dom() == ker_) || !(right_leg_.dom() == ker_))
            throw std::invalid_argument("rule: legs must share the kernel as domain");
        if (!(left_leg_.cod() == lhs_) || !(right_leg_.cod() == rhs_))
            throw std::invalid_argument("rule: leg codomains must be lhs/rhs");
        if (!left_leg_.mono() || !right_leg_.mono())
            throw std::invalid_argument("rule: both legs must be monos");
    }

    const Graph& lhs() const { return lhs_; }
    const Graph& rhs() const { return rhs_; }
    const Graph& ker() const { return ker_; }
    const Morphism& left_leg() const { return left_leg_; }
    const Morphism& right_leg() const { return right_leg_; }
    std::uint32_t uid() const { return uid_; }
    const std::string& name() const { return name_; }

    /// The underlying partial map L -> R on ids: left-leg image to right-leg
    /// image. Lossless because the left leg is mono.
    std::map<Id, Id> node_pmap() const {
        std::map<Id, Id> m;
        for (const Node& k : ker_.nodes()) m[left_leg_.on_node(k.id)] = right_leg_.on_node(k.id);
        return m;
    }
    std::map<Id, Id> edge_pmap() const {
        std::map<Id, Id> m;
        for (const Edge& k : ker_.edges()) m[left_leg_.on_edge(k.id)] = right_leg_.on_edge(k.id);
        return m;
    }

    friend bool operator==(const Rule& a, const Rule& b) {
        return a.lhs_ == b.lhs_ && a.rhs_ == b.rhs_ && a.ker_ == b.ker_ &&
               a.left_leg_ == b.left_leg_ && a.right_leg_ == b.right_leg_;
    }

private:
    Graph lhs_, rhs_, ker_;
    Morphism left_leg_, right_leg_;
    std::uint32_t uid_ = 0;
    std::string name_;
};

/// Swaps the two legs. An involution, not an inverse.
inline Rule reverse_rule(const Rule& r) {
    return Rule(r.rhs(), r.lhs(), r.ker(), r.right_leg(), r.left_leg(), r.uid(),
                r.name().empty() ? std::string{} : r.name() + "~");
}

/// Builds a rule from explicit graphs and the kernel correspondence
/// (lhs id -> rhs id for preserved items). Kernel items reuse the lhs ids.
inline Rule make_rule(const Graph& lhs, const Graph& rhs,
                      const std::vector<std::pair<Id, Id>>& node_corr,
                      const std::vector<std::pair<Id, Id>>& edge_corr,
                      std::uint32_t uid = 0, std::string name = {}) {
    std::vector<Node> kn;
    std::vector<Edge> ke;
    std::vector<std::pair<Id, Id>> ln, le, rn, re;
    std::set<Id> seen_l, seen_r;
    for (auto& [l, r] : node_corr) {
        const Node* a = lhs.find_node_checked(l);
        const Node* b = rhs.find_node_checked(r);
        if (a->label != b->label) throw std::invalid_argument("rule correspondence: node label mismatch");
        if (!seen_l.insert(l).second || !seen_r.insert(r).second)
            throw std::invalid_argument("rule correspondence: not injective on nodes");
        kn.push_back({l, a->label});
        ln.push_back({l, l});
        rn.push_back({l, r});
    }
    std::map<Id, Id> nmap(node_corr.begin(), node_corr.end());
    std::set<Id> seen_le, seen_re;
    for (auto& [l, r] : edge_corr) {
        const Edge* a = lhs.find_edge_checked(l);
        const Edge* b = rhs.find_edge_checked(r);
        if (a->label != b->label) throw std::invalid_argument("rule correspondence: edge label mismatch");
        if (!seen_le.insert(l).second || !seen_re.insert(r).second)
            throw std::invalid_argument("rule correspondence: not injective on edges");
        auto s = nmap.find(a->src), t = nmap.find(a->tgt);
        if (s == nmap.end() || t == nmap.end() || s->second != b->src || t->second != b->tgt)
            throw std::invalid_argument("rule correspondence: edge endpoints not preserved");
        ke.push_back({l, a->src, a->tgt, a->label});
        le.push_back({l, l});
        re.push_back({l, r});
    }
    Graph ker(std::move(kn), std::move(ke));
    Morphism left(ker, lhs, IdMap(std::move(ln)), IdMap(std::move(le)));
    Morphism right(ker, rhs, IdMap(std::move(rn)), IdMap(std::move(re)));
    return Rule(lhs, rhs, ker, std::move(left), std::move(right), uid, std::move(name));
}

// ---------------------------------------------------------------------------
// Limits and colimits in the category of directed labeled multigraphs.
// ---------------------------------------------------------------------------

struct Cospan {
    Graph obj;
    Morphism from_b; // B -> obj
    Morphism from_c; // C -> obj
};

struct Span {
    Graph apex;
    Morphism to_b; // apex -> B
    Morphism to_c; // apex -> C
};

namespace detail {

class UnionFind {
public:
    std::size_t add() {
        parent_.push_back(parent_.size());
        return parent_.size() - 1;
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a); b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }
private:
    std::vector<std::size_t> parent_;
};

} // namespace detail

/// Pushout of a span  B <-f- A -g-> C  with at least one leg mono:
/// disjoint union of B and C quotiented by f(a) ~ g(a).
inline Cospan pushout(const Morphism& f, const Morphism& g) {
    if (!(f.dom() == g.dom())) throw std::invalid_argument("pushout: span legs must share a domain");
    if (!f.mono() && !g.mono())
        throw std::invalid_argument("pushout: at least one span leg must be mono");
    const Graph& a = f.dom();
    const Graph& b = f.cod();
    const Graph& c = g.cod();

    detail::UnionFind un, ue;
    std::map<std::pair<int, Id>, std::size_t> nslot, eslot; // (side, id): 0 = B, 1 = C
    for (const Node& n : b.nodes()) nslot[{0, n.id}] = un.add();
    for (const Node& n : c.nodes()) nslot[{1, n.id}] = un.add();
    for (const Edge& e : b.edges()) eslot[{0, e.id}] = ue.add();
    for (const Edge& e : c.edges()) eslot[{1, e.id}] = ue.add();
    for (const Node& n : a.nodes())
        un.unite(nslot[{0, f.on_node(n.id)}], nslot[{1, g.on_node(n.id)}]);
    for (const Edge& e : a.edges())
        ue.unite(eslot[{0, f.on_edge(e.id)}], eslot[{1, g.on_edge(e.id)}]);

    // Fresh ids per class, numbered in the deterministic slot order.
    std::map<std::size_t, Id> nclass_id, eclass_id;
    std::vector<Node> pnodes;
    std::vector<Edge> pedges;
    auto node_label = [&](int side, Id id) -> const Label& {
        return side == 0 ? b.find_node_checked(id)->label : c.find_node_checked(id)->label;
    };
    for (auto& [key, slot] : nslot) {
        std::size_t root = un.find(slot);
        if (!nclass_id.count(root)) {
            Id fresh = nclass_id.size();
            nclass_id[root] = fresh;
            pnodes.push_back({fresh, node_label(key.first, key.second)});
        }
    }
    auto node_class = [&](int side, Id id) { return nclass_id.at(un.find(nslot.at({side, id}))); };
    for (auto& [key, slot] : eslot) {
        std::size_t root = ue.find(slot);
        if (!eclass_id.count(root)) {
            Id fresh = eclass_id.size();
            eclass_id[root] = fresh;
            const Edge* e = key.first == 0 ? b.find_edge_checked(key.second)
                                           : c.find_edge_checked(key.second);
            pedges.push_back({fresh, node_class(key.first, e->src), node_class(key.first, e->tgt), e->label});
        }
    }
    Graph p(std::move(pnodes), std::move(pedges));

    auto leg = [&](int side, const Graph& src) {
        std::vector<std::pair<Id, Id>> nm, em;
        for (const Node& n : src.nodes()) nm.push_back({n.id, node_class(side, n.id)});
        for (const Edge& e : src.edges()) em.push_back({e.id, eclass_id.at(ue.find(eslot.at({side, e.id})))});
        return Morphism(src, p, IdMap(std::move(nm)), IdMap(std::move(em)));
    };
    return Cospan{p, leg(0, b), leg(1, c)};
}

/// Pullback of a cospan  B -f-> D <-g- C : the fibered product on nodes and
/// edges (labels agree automatically since f and g preserve them).
inline Span pullback(const Morphism& f, const Morphism& g) {
    if (!(f.cod() == g.cod())) throw std::invalid_argument("pullback: cospan legs must share a codomain");
    const Graph& b = f.dom();
    const Graph& c = g.dom();

    std::vector<std::pair<Id, Id>> node_pairs, edge_pairs;
    for (const Node& nb : b.nodes())
        for (const Node& nc : c.nodes())
            if (f.on_node(nb.id) == g.on_node(nc.id)) node_pairs.push_back({nb.id, nc.id});
    for (const Edge& eb : b.edges())
        for (const Edge& ec : c.edges())
            if (f.on_edge(eb.id) == g.on_edge(ec.id)) edge_pairs.push_back({eb.id, ec.id});

    std::map<std::pair<Id, Id>, Id> nid;
    std::vector<Node> nodes;
    for (auto& pr : node_pairs) {
        Id fresh = nid.size();
        nid[pr] = fresh;
        nodes.push_back({fresh, b.find_node_checked(pr.first)->label});
    }
    std::vector<Edge> edges;
    std::vector<std::pair<Id, Id>> em_b, em_c;
    Id next_e = 0;
    for (auto& pr : edge_pairs) {
        const Edge* eb = b.find_edge_checked(pr.first);
        const Edge* ec = c.find_edge_checked(pr.second);
        Id s = nid.at({eb->src, ec->src});
        Id t = nid.at({eb->tgt, ec->tgt});
        edges.push_back({next_e, s, t, eb->label});
        em_b.push_back({next_e, eb->id});
        em_c.push_back({next_e, ec->id});
        ++next_e;
    }
    Graph apex(std::move(nodes), std::move(edges));
    std::vector<std::pair<Id, Id>> nm_b, nm_c;
    for (auto& [pr, fresh] : nid) {
        nm_b.push_back({fresh, pr.first});
        nm_c.push_back({fresh, pr.second});
    }
    Morphism to_b(apex, b, IdMap(std::move(nm_b)), IdMap(std::move(em_b)));
    Morphism to_c(apex, c, IdMap(std::move(nm_c)), IdMap(std::move(em_c)));
    return Span{apex, to_b, to_c};
}

struct FpbcResult {
    Graph complement;   // D
    Morphism k_to_d;    // K -> D
    Morphism d_to_g;    // D -> G (inclusion)
};

/// Final pullback complement of  K -k-> L -f-> G  for monos k, f:
/// removes f(L \ k(K)) from G together with any edges left dangling.
inline FpbcResult final_pullback_complement(const Morphism& k, const Morphism& f) {
    if (!k.mono() || !f.mono())
        throw std::invalid_argument("final pullback complement: both morphisms must be monos");
    if (!(k.cod() == f.dom()))
        throw std::invalid_argument("final pullback complement: k and f must compose");
    const Graph& l = f.dom();
    const Graph& g = f.cod();

    std::set<Id> preserved_l_nodes, preserved_l_edges;
    for (const Node& n : k.dom().nodes()) preserved_l_nodes.insert(k.on_node(n.id));
    for (const Edge& e : k.dom().edges()) preserved_l_edges.insert(k.on_edge(e.id));

    std::set<Id> deleted_nodes, deleted_edges;
    for (const Node& n : l.nodes())
        if (!preserved_l_nodes.count(n.id)) deleted_nodes.insert(f.on_node(n.id));
    for (const Edge& e : l.edges())
        if (!preserved_l_edges.count(e.id)) deleted_edges.insert(f.on_edge(e.id));
    for (const Edge& e : g.edges())
        if (deleted_nodes.count(e.src) || deleted_nodes.count(e.tgt)) deleted_edges.insert(e.id);

    std::vector<Id> keep_nodes, keep_edges;
    for (const Node& n : g.nodes())
        if (!deleted_nodes.count(n.id)) keep_nodes.push_back(n.id);
    for (const Edge& e : g.edges())
        if (!deleted_edges.count(e.id)) keep_edges.push_back(e.id);
    Graph d = g.restrict_to(keep_nodes, keep_edges);

    std::vector<std::pair<Id, Id>> nm, em;
    for (const Node& n : k.dom().nodes()) nm.push_back({n.id, f.on_node(k.on_node(n.id))});
    for (const Edge& e : k.dom().edges()) em.push_back({e.id, f.on_edge(k.on_edge(e.id))});
    Morphism k_to_d(k.dom(), d, IdMap(std::move(nm)), IdMap(std::move(em)));
    Morphism d_to_g = Morphism::inclusion(d, g);
    return FpbcResult{d, std::move(k_to_d), std::move(d_to_g)};
}

/// Fresh-id allocator for rule applications. Created items are named by
/// (rule uid, application counter, ordinal of the created item in the rhs),
/// so the representative derivation for a given match is reproducible.
class RewriteContext {
public:
    std::uint64_t begin_application() { return app_counter_++; }

    static Id fresh_id(std::uint32_t rule_uid, std::uint64_t app, std::uint32_t ordinal) {
        if (rule_uid > 0x7FFF) throw std::overflow_error("rewrite context: rule uid too large");
        if (app > 0xFFFFFFFFull) throw std::overflow_error("rewrite context: application counter exhausted");
        if (ordinal > 0xFFFF) throw std::overflow_error("rewrite context: rhs too large");
        return (Id(1) << 63) | (Id(rule_uid) << 48) | (app << 16) | ordinal;
    }

private:
    std::uint64_t app_counter_ = 0;
};

/// The commuting square of a rewrite step, with its inner arrows retained:
///
///     L <--a1-- K --a2--> R
///     |f        |h        |g
///     v         v         v
///     G <--b1-- D --b2--> H
struct Derivation {
    Rule rule;
    Morphism match;    // f : L -> G
    Morphism comatch;  // g : R -> H
    Rule corule;       // beta : G -> H with kernel D
    Morphism inner;    // h : K -> D
};

/// Applies a rule at a match: final pullback complement for deletion, then
/// pushout along the right leg for creation. Total for every match; created
/// items draw fresh ids from the context.
inline Derivation apply_rule(const Rule& rule, const Morphism& match, RewriteContext& ctx) {
    if (!(match.dom() == rule.lhs()))
        throw std::invalid_argument("apply_rule: match domain must be the rule lhs");
    if (!match.mono()) throw std::invalid_argument("apply_rule: match must be mono");

    const std::uint64_t app = ctx.begin_application();
    FpbcResult del = final_pullback_complement(rule.left_leg(), match);

    // Right-leg preimage on rhs items: created items are those without one.
    std::map<Id, Id> rhs_node_from_ker, rhs_edge_from_ker;
    for (const Node& n : rule.ker().nodes()) rhs_node_from_ker[rule.right_leg().on_node(n.id)] = n.id;
    for (const Edge& e : rule.ker().edges()) rhs_edge_from_ker[rule.right_leg().on_edge(e.id)] = e.id;

    std::vector<Node> hnodes(del.complement.nodes());
    std::vector<Edge> hedges(del.complement.edges());
    std::vector<std::pair<Id, Id>> g_nm, g_em;
    std::uint32_t ordinal = 0;
    std::map<Id, Id> created_node_id;
    for (const Node& n : rule.rhs().nodes()) {
        auto it = rhs_node_from_ker.find(n.id);
        if (it != rhs_node_from_ker.end()) {
            g_nm.push_back({n.id, del.k_to_d.on_node(it->second)});
        } else {
            Id fresh = RewriteContext::fresh_id(rule.uid(), app, ordinal++);
            created_node_id[n.id] = fresh;
            hnodes.push_back({fresh, n.label});
            g_nm.push_back({n.id, fresh});
        }
    }
    auto rhs_node_in_h = [&](Id rid) -> Id {
        auto it = rhs_node_from_ker.find(rid);
        if (it != rhs_node_from_ker.end()) return del.k_to_d.on_node(it->second);
        return created_node_id.at(rid);
    };
    for (const Edge& e : rule.rhs().edges()) {
        auto it = rhs_edge_from_ker.find(e.id);
        if (it != rhs_edge_from_ker.end()) {
            g_em.push_back({e.id, del.k_to_d.on_edge(it->second)});
        } else {
            Id fresh = RewriteContext::fresh_id(rule.uid(), app, ordinal++);
            hedges.push_back({fresh, rhs_node_in_h(e.src), rhs_node_in_h(e.tgt), e.label});
            g_em.push_back({e.id, fresh});
        }
    }
    Graph h(std::move(hnodes), std::move(hedges));
    Morphism comatch(rule.rhs(), h, IdMap(std::move(g_nm)), IdMap(std::move(g_em)));

    Morphism d_to_h = Morphism::inclusion(del.complement, h);
    Rule corule(match.cod(), h, del.complement, del.d_to_g, d_to_h, rule.uid(), "step");
    return Derivation{rule, match, comatch, std::move(corule), del.k_to_d};
}

/// Span composition of rules via a pullback over the shared interface.
inline Rule compose_rules(const Rule& a, const Rule& b) {
    if (!(a.rhs() == b.lhs()))
        throw std::invalid_argument("compose_rules: rhs of the first rule must equal lhs of the second");
    Span pb = pullback(a.right_leg(), b.left_leg());
    Morphism left = compose(a.left_leg(), pb.to_b);
    Morphism right = compose(b.right_leg(), pb.to_c);
    return Rule(a.lhs(), b.rhs(), pb.apex, std::move(left), std::move(right), a.uid(),
                a.name().empty() && b.name().empty() ? std::string{} : a.name() + "." + b.name());
}

struct DerivabilityResult {
    bool derivable = false;
    std::optional<Morphism> witness; // f : L -> G with  f ~a~> g  when derivable
};

/// A comatch g of rhs(rule) is derivable when applying the reverse rule to g
/// and the rule to the resulting match reproduces g's codomain, up to an
/// isomorphism commuting with both comatches.
inline DerivabilityResult is_derivable(const Morphism& g, const Rule& rule) {
    if (!(g.dom() == rule.rhs()))
        throw std::invalid_argument("is_derivable: comatch domain must be the rule rhs");
    if (!g.mono()) throw std::invalid_argument("is_derivable: comatch must be mono");

    RewriteContext ctx;
    Derivation back = apply_rule(reverse_rule(rule), g, ctx);
    const Morphism& f = back.comatch; // L -> G'
    Derivation forth = apply_rule(rule, f, ctx);
    const Morphism& g2 = forth.comatch; // R -> H'

    std::vector<std::pair<Id, Id>> fixed_nodes, fixed_edges;
    for (const Node& n : rule.rhs().nodes()) fixed_nodes.push_back({g2.on_node(n.id), g.on_node(n.id)});
    for (const Edge& e : rule.rhs().edges()) fixed_edges.push_back({g2.on_edge(e.id), g.on_edge(e.id)});
    auto iso = find_iso_extending(g2.cod(), g.cod(), fixed_nodes, fixed_edges);
    if (!iso) return {};
    return DerivabilityResult{true, f};
}

// ---------------------------------------------------------------------------
// Square-shape checks used by the property suites.
// ---------------------------------------------------------------------------

/// An isomorphism u with u . from_b' = from_b and u . from_c' = from_c exists
/// iff the candidate cospan is the pushout of the same span. The mediating
/// morphism out of the canonical pushout is forced pointwise, so this checks
/// the universal property exactly.
inline bool is_pushout_of(const Morphism& f, const Morphism& g,
                          const Morphism& into_b, const Morphism& into_c) {
    if (!(into_b.dom() == f.cod()) || !(into_c.dom() == g.cod())) return false;
    if (!(into_b.cod() == into_c.cod())) return false;
    for (const Node& n : f.dom().nodes())
        if (into_b.on_node(f.on_node(n.id)) != into_c.on_node(g.on_node(n.id))) return false;
    for (const Edge& e : f.dom().edges())
        if (into_b.on_edge(f.on_edge(e.id)) != into_c.on_edge(g.on_edge(e.id))) return false;

    Cospan canon = pushout(f, g);
    // Forced mediating map canon.obj -> candidate object.
    std::map<Id, Id> nmed, emed;
    auto force = [](std::map<Id, Id>& m, Id k, Id v) {
        auto it = m.find(k);
        if (it == m.end()) { m[k] = v; return true; }
        return it->second == v;
    };
    for (const Node& n : f.cod().nodes())
        if (!force(nmed, canon.from_b.on_node(n.id), into_b.on_node(n.id))) return false;
    for (const Node& n : g.cod().nodes())
        if (!force(nmed, canon.from_c.on_node(n.id), into_c.on_node(n.id))) return false;
    for (const Edge& e : f.cod().edges())
        if (!force(emed, canon.from_b.on_edge(e.id), into_b.on_edge(e.id))) return false;
    for (const Edge& e : g.cod().edges())
        if (!force(emed, canon.from_c.on_edge(e.id), into_c.on_edge(e.id))) return false;

    const Graph& cand = into_b.cod();
    if (nmed.size() != canon.obj.node_count() || emed.size() != canon.obj.edge_count()) return false;
    if (cand.node_count() != canon.obj.node_count() || cand.edge_count() != canon.obj.edge_count())
        return false;
    std::vector<std::pair<Id, Id>> nm(nmed.begin(), nmed.end()), em(emed.begin(), emed.end());
    try {
        Morphism u(canon.obj, cand, IdMap(std::move(nm)), IdMap(std::move(em)));
        return u.mono(); // mono between equal-sized graphs: iso
    } catch (const std::invalid_argument&) {
        return false;
    }
}

/// Checks that the candidate span is the pullback of the cospan (f, g), via
/// the forced mediating morphism into the canonical fibered product.
inline bool is_pullback_of(const Morphism& f, const Morphism& g,
                           const Morphism& to_b, const Morphism& to_c) {
    if (!(to_b.cod() == f.dom()) || !(to_c.cod() == g.dom())) return false;
    if (!(to_b.dom() == to_c.dom())) return false;
    for (const Node& n : to_b.dom().nodes())
        if (f.on_node(to_b.on_node(n.id)) != g.on_node(to_c.on_node(n.id))) return false;
    for (const Edge& e : to_b.dom().edges())
        if (f.on_edge(to_b.on_edge(e.id)) != g.on_edge(to_c.on_edge(e.id))) return false;

    Span canon = pullback(f, g);
    if (canon.apex.node_count() != to_b.dom().node_count() ||
        canon.apex.edge_count() != to_b.dom().edge_count())
        return false;
    // Mediating candidate -> canon, forced by the pair of projections.
    std::map<std::pair<Id, Id>, Id> canon_nodes, canon_edges;
    for (const Node& n : canon.apex.nodes())
        canon_nodes[{canon.to_b.on_node(n.id), canon.to_c.on_node(n.id)}] = n.id;
    for (const Edge& e : canon.apex.edges())
        canon_edges[{canon.to_b.on_edge(e.id), canon.to_c.on_edge(e.id)}] = e.id;
    std::set<Id> hit_nodes, hit_edges;
    for (const Node& n : to_b.dom().nodes()) {
        auto it = canon_nodes.find({to_b.on_node(n.id), to_c.on_node(n.id)});
        if (it == canon_nodes.end() || !hit_nodes.insert(it->second).second) return false;
    }
    for (const Edge& e : to_b.dom().edges()) {
        auto it = canon_edges.find({to_b.on_edge(e.id), to_c.on_edge(e.id)});
        if (it == canon_edges.end() || !hit_edges.insert(it->second).second) return false;
    }
    return true;
}

} // namespace rateq

#endif
