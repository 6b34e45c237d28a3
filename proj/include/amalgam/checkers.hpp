#ifndef AMALGAM_CHECKERS_HPP
#define AMALGAM_CHECKERS_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace amalgam {

// A morphism between systems in driver-neutral form: for each unit (point
// or atom) of the source, the set of target units it maps to.  Point-based
// classes use singleton images; Boolean algebras use blocks.
using Morphism = std::vector<std::vector<int>>;

// (g . f)(u) = union of g-images over f's image of u.
Morphism compose_morphisms(const Morphism& f, const Morphism& g);

// A pluggable Fraissé-class driver.  Systems are serialized in a
// driver-chosen canonical encoding; enumeration is deterministic and
// duplicate-free up to isomorphism.  Drivers are stateless and safe to
// share across threads.
class ClassDriver {
public:
    virtual ~ClassDriver() = default;
    virtual std::string name() const = 0;

    // All canonical n-systems whose structure has at most `size_bound`
    // units.
    virtual std::vector<std::string> enumerate_systems(int n,
                                                       int size_bound) const = 0;
    virtual int system_size(const std::string& sys) const = 0;
    // Every system embedding of s into t (each verified by construction).
    virtual std::vector<Morphism> enumerate_embeddings(
        const std::string& s, const std::string& t) const = 0;
    virtual bool embeds(const std::string& s, const std::string& t) const;

    // Arity (number of maps) of an encoded system.
    virtual int system_arity(const std::string& sys) const = 0;
    // Checks a specific morphism without enumerating all embeddings.
    virtual bool valid_embedding(const std::string& s, const std::string& t,
                                 const Morphism& f) const;
    // Largest structure size this driver can enumerate exhaustively at
    // desk scale; generic fallback searches clamp to it.
    virtual int enumeration_cap() const { return 5; }

    // Constructive joint embedding; nullopt means "search exhaustively".
    virtual std::optional<std::string> joint_embed(const std::string& s,
                                                   const std::string& t) const;
    // Constructive joint embedding together with its two legs, for
    // consumers (e.g. the construction builder) that need replayable
    // witnesses.  The returned encoding need not be canonical.
    struct JointWitness {
        std::string system;
        Morphism left;  // s -> system
        Morphism right; // t -> system
    };
    virtual std::optional<JointWitness> joint_embed_with_legs(
        const std::string& s, const std::string& t) const;
    // First embedding of s into t, using a driver-tuned search where one
    // exists (the default scans enumerate_embeddings, which is only
    // viable for small targets).
    virtual std::optional<Morphism> find_embedding(
        const std::string& s, const std::string& t) const;
    // First embedding e of s into t with e . left == right, i.e. an
    // embedding respecting a fixed placement of a common base.
    virtual std::optional<Morphism> find_embedding_over(
        const std::string& base, const Morphism& left, const std::string& s,
        const Morphism& right, const std::string& t) const;
    // Constructive amalgam candidate for the span t1 <-f1- s -f2-> t2,
    // with its two legs; the checker re-verifies any returned candidate.
    struct SpanAmalgam {
        std::string system;
        Morphism left;  // t1 -> system
        Morphism right; // t2 -> system
    };
    virtual std::optional<SpanAmalgam> amalgamate(const std::string& s,
                                                  const Morphism& f1,
                                                  const std::string& t1,
                                                  const Morphism& f2,
                                                  const std::string& t2) const;
    // Extension candidates tried first as WAP witnesses / cofinal members.
    virtual std::vector<std::string> extension_candidates(
        const std::string& s) const;

    virtual bool has_cofinal_oracle() const { return false; }
    virtual bool cofinal_member(const std::string& sys) const;
    // True when any JEP counterexample in this class is a class-level
    // theorem rather than a bound artifact.
    virtual bool jep_failure_bound_independent() const { return false; }
};

struct CheckOptions {
    bool parallel = true;
};

struct CheckReport {
    std::string property; // "JEP" | "WAP" | "CAP" | "CJEP"
    std::string driver;
    int n = 0;
    int bound = 0;
    bool holds = false;            // up to the stated bound
    bool bound_independent = false; // counterexample is a class theorem
    std::string detail;            // witness table or counterexample note
    std::vector<std::string> counterexample; // offending systems
};

// Joint embedding property over all pairs within the bound; with a pinned
// base this is the cofinal JEP (only systems containing the base).
CheckReport check_jep(const ClassDriver& d, int n, int bound,
                      const std::string* pinned_base = nullptr,
                      const CheckOptions& opt = {});

// Weak amalgamation: per system S, search for an extension S-hat (driver
// candidates first, then all extensions within 2|S|) over which every pair
// of further extensions amalgamates over S.
CheckReport check_wap(const ClassDriver& d, int n, int bound,
                      const CheckOptions& opt = {});

// True when s_hat witnesses bounded WAP for s (some embedding of s into
// s_hat makes every span of extensions of s_hat amalgamate over s).
bool wap_witness_ok(const ClassDriver& d, const std::string& s,
                    const std::string& s_hat, int bound);

// Cofinal amalgamation over the driver's cofinal subclass: (a) every
// system embeds into a subclass member, (b) every span of subclass
// extensions amalgamates.
CheckReport check_cap(const ClassDriver& d, int n, int bound,
                      const CheckOptions& opt = {});

std::unique_ptr<ClassDriver> make_boolean_driver();
// The Boolean driver's encoding, exposed so other components (the
// construction builder, the CLI) can move between encoded systems and the
// algebraic representation.
struct PartialIsoSystem;
std::string encode_boolean_system(const PartialIsoSystem& s);
PartialIsoSystem decode_boolean_system(const std::string& enc);
// Structural embedding search for single-map systems: assigns domain
// blocks of the target to domain blocks of the source with chain
// propagation, so it scales to large targets where the generic
// enumeration does not.  Falls back to the exhaustive search for
// higher-arity systems.
// When atom_pins is given, it restricts the colors (source atoms) allowed
// for each target atom; used to search for embeddings over a fixed
// placement of a common base.
struct AlgebraEmbedding;
std::optional<AlgebraEmbedding> find_iso_embedding(
    const PartialIsoSystem& s, const PartialIsoSystem& t,
    const std::vector<std::vector<int>>* atom_pins = nullptr);

std::unique_ptr<ClassDriver> make_equiv2_driver();       // <= 2 classes
std::unique_ptr<ClassDriver> make_linear_order_driver();
std::unique_ptr<ClassDriver> make_graph_driver();
std::unique_ptr<ClassDriver> make_metric_driver(); // distances in {1, 2}

} // namespace amalgam

#endif
