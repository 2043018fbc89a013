#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "opch/diterm.hpp"
#include "opch/linalg.hpp"
#include "opch/term.hpp"

namespace opch {

enum class NumOps { One, Two };
enum class NfStrategy { ClosedFormBiCom, GenericLinear };

// A defining identity, stored as "relation = 0" over placeholder variables
// x1, x2(, x3). One-operation identities use `relation`; two-operation
// identities use `di_relation`.
struct Identity {
    std::string label;
    NumOps num_ops = NumOps::One;
    int placeholder_count = 3;
    Expr relation;
    DiExpr di_relation;
};

struct VarietySpec {
    std::string name;
    NumOps num_ops = NumOps::One;
    NfStrategy strategy = NfStrategy::GenericLinear;
    std::vector<Identity> identities;
    std::string partner;  // two-op variety <-> its one-op counterpart
};

// Known varieties: Com, As, Alt, Assos, BiCom, Nov, Zinb (one operation) and
// DerAlt, DerAssos, DerBiCom (two operations). Lookup is case-insensitive.
// Errors: UnknownVariety.
const VarietySpec& catalog(const std::string& name);
std::vector<std::string> catalog_names();

// Substitutes args for the placeholders of an identity.
// Errors: ArityMismatch on wrong arg count; VariableClash when args share
// variables.
Expr instantiate(const Identity& id, const std::vector<Monomial>& args);
DiExpr di_instantiate(const Identity& id, const std::vector<DiMonomial>& args);

// One induction step of multilinear consequence generation. `prev` spans the
// arity n-1 consequence space on x_1..x_{n-1}; the result spans arity n:
// instances of arity-n identities, plus, for every choice of fresh variable
// x_f, copies of `prev` relabelled onto the other variables and extended by
// x_v -> (x_v x_f), x_v -> (x_f x_v), left and right multiplication by x_f.
// Feeding each step the reduced basis of the previous span keeps the
// generated set small without changing the span.
std::vector<Expr> consequence_step(const VarietySpec& v, int n, const std::vector<Expr>& prev);
std::vector<DiExpr> di_consequence_step(const VarietySpec& v, int n,
                                        const std::vector<DiExpr>& prev);

// Spanning set of the arity-n multilinear consequence space, undecorated when
// w is absent, else with derivation decorations of total n + w (obtained by
// decorating an undecorated spanning set in every admissible way).
std::vector<Expr> consequences(const VarietySpec& v, int n, std::optional<int> w = std::nullopt);
std::vector<DiExpr> di_consequences(const VarietySpec& v, int n);

// Closed-form normal form for the two commutativity-style identities
// a(bc) = b(ac) and (ab)c = (ac)b: a monomial's class is determined by which
// leaves sit as left children and which as right children, so each class maps
// to a fixed caterpillar representative.
Monomial bicom_canonical(const Monomial& m);
Expr bicom_normal_form(const Expr& e);

// Left-child / right-child leaf split of a monomial of arity >= 2.
void bicom_class_split(const Monomial& m, std::vector<Generator>& left,
                       std::vector<Generator>& right);

class Workspace;

// The multilinear component of a variety at fixed arity, either undecorated
// (weight() == nullopt) or with derivation decorations summing to n + w.
// Quotient coordinates are residuals against the reduced echelon basis of the
// consequence space, so classes compare by exact residual equality.
class Component {
public:
    const std::string& variety() const { return variety_; }
    int arity() const { return arity_; }
    std::optional<int> weight() const { return weight_; }

    const std::vector<Monomial>& ambient() const { return ambient_; }
    int ambient_dim() const { return static_cast<int>(ambient_.size()); }
    int consequence_rank() const;
    int dim() const { return ambient_dim() - consequence_rank(); }

    // Index of m in the ambient list; -1 when absent.
    int index_of(const Monomial& m) const;

    // Canonical residual coordinates of e's class, indexed by the ambient.
    // Errors: ArityMismatch if a monomial is not multilinear of this arity;
    // MixedWeight if e's weight disagrees with the component's.
    SparseVec coords(const Expr& e) const;
    bool is_zero_class(const Expr& e) const { return coords(e).empty(); }
    Expr residual(const Expr& e) const;

private:
    friend class Workspace;
    Component() = default;

    std::string variety_;
    int arity_ = 0;
    std::optional<int> weight_;
    std::vector<Monomial> ambient_;
    std::map<Monomial, int> index_;

    // Undecorated component: its own echelon basis.
    std::shared_ptr<const SpanBasis> basis_;
    // Decorated component: delegates per decoration block to the plain one.
    std::shared_ptr<const Component> plain_;
};

// Same machinery over the two-operation span (no decorations).
class DiComponent {
public:
    const std::string& variety() const { return variety_; }
    int arity() const { return arity_; }
    const std::vector<DiMonomial>& ambient() const { return ambient_; }
    int ambient_dim() const { return static_cast<int>(ambient_.size()); }
    int consequence_rank() const { return basis_->rank(); }
    int dim() const { return ambient_dim() - consequence_rank(); }
    int index_of(const DiMonomial& m) const;
    SparseVec coords(const DiExpr& e) const;
    bool is_zero_class(const DiExpr& e) const { return coords(e).empty(); }

private:
    friend class Workspace;
    DiComponent() = default;

    std::string variety_;
    int arity_ = 0;
    std::vector<DiMonomial> ambient_;
    std::map<DiMonomial, int> index_;
    std::shared_ptr<const SpanBasis> basis_;
};

// Owns memoized component bases and the on-disk cache. Cache directory
// resolution: constructor argument, else $OPCH_CACHE_DIR, else .opch-cache/.
// Undecorated echelon bases are persisted as one JSON file per
// (variety, arity); decorated components reuse them block by block and are
// not separately materialized.
class Workspace {
public:
    explicit Workspace(std::string cache_dir = "");
    ~Workspace();
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    const std::string& cache_dir() const { return cache_dir_; }

    int max_arity() const { return max_arity_; }
    void set_max_arity(int n);

    // Undecorated multilinear component. Errors: UnknownVariety;
    // ArityTooLarge beyond max_arity() + 1.
    const Component& component(const std::string& variety, int n);
    // Decorated component of the given weight. Errors as above, plus
    // InvalidWeight for n + w < 0; decorated components stop at max_arity().
    const Component& component(const std::string& variety, int n, int w);
    // Two-operation consequence quotient. Errors: UnknownVariety (also for
    // one-operation names), ArityTooLarge.
    const DiComponent& di_component(const std::string& variety, int n);

    // tau image data of the two-operation span inside component(v, n, -1):
    // column j is coords(tau(enumerate_di_monomials(n)[j])).
    struct Expansion {
        std::vector<DiMonomial> di_ambient;
        std::vector<SparseVec> columns;
        int rank = 0;
    };
    const Expansion& expansion(const std::string& variety, int n);

    // Preimage solver over the expansion columns, memoized per (variety, n).
    // Errors: NotInImage when target is outside the tau image.
    std::vector<Rat> solve_expansion(const std::string& variety, int n,
                                     const SparseVec& target);

private:
    const Component& plain_component(const VarietySpec& v, int n);
    std::shared_ptr<Component> build_plain(const VarietySpec& v, int n);
    bool load_cached(const VarietySpec& v, int n, const std::vector<Monomial>& ambient,
                     SpanBasis& basis);
    void store_cache(const VarietySpec& v, int n, const std::vector<Monomial>& ambient,
                     const SpanBasis& basis);

    std::string cache_dir_;
    int max_arity_ = 4;
    std::map<std::pair<std::string, int>, std::shared_ptr<Component>> plain_;
    std::map<std::tuple<std::string, int, int>, std::unique_ptr<Component>> decorated_;
    std::map<std::pair<std::string, int>, std::unique_ptr<DiComponent>> di_;
    std::map<std::pair<std::string, int>, std::unique_ptr<Expansion>> expansions_;
    struct Solver;
    std::map<std::pair<std::string, int>, std::unique_ptr<Solver>> solvers_;
};

// Coordinates of e's class in the weight-w arity-n quotient of v.
SparseVec quotient_normal_form(Workspace& ws, const VarietySpec& v, int n, int w, const Expr& e);

} // namespace opch
