#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace bcp {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
    EntityId subject = 0;
    EntityId object = 0;
    RelationId relation = 0;

    friend auto operator<=>(const Triple&, const Triple&) = default;
};

enum class Split : std::uint8_t { Train, Valid, Test };

class ParseError : public std::runtime_error {
   public:
    ParseError(const std::string& source, std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

   private:
    std::size_t line_;
};

// Bidirectional label <-> dense index maps for entities and relations.
class Vocab {
   public:
    std::size_t num_entities() const { return entity_labels_.size(); }
    std::size_t num_relations() const { return relation_labels_.size(); }

    std::optional<EntityId> find_entity(std::string_view label) const;
    std::optional<RelationId> find_relation(std::string_view label) const;

    // Returns the existing index when the label is already present.
    EntityId add_entity(std::string_view label);
    RelationId add_relation(std::string_view label);

    const std::string& entity_label(EntityId id) const;
    const std::string& relation_label(RelationId id) const;

    // A frozen vocabulary rejects additions (valid/test loading).
    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    // Inverse augmentation appends `<label>#inv` for every base relation;
    // relation k pairs with k + base_relations().
    bool inverse_augmented() const { return augmented_; }
    std::size_t base_relations() const {
        return augmented_ ? relation_labels_.size() / 2 : relation_labels_.size();
    }
    RelationId inverse(RelationId k) const;
    void augment_inverse();

   private:
    std::unordered_map<std::string, EntityId> entity_ids_;
    std::unordered_map<std::string, RelationId> relation_ids_;
    std::vector<std::string> entity_labels_;
    std::vector<std::string> relation_labels_;
    bool frozen_ = false;
    bool augmented_ = false;
};

enum class UnknownPolicy { Skip, Error };
enum class DuplicatePolicy { Reject, Dedup };

struct LoadOptions {
    UnknownPolicy unknown = UnknownPolicy::Skip;
    DuplicatePolicy duplicates = DuplicatePolicy::Reject;
};

struct TripleFile {
    std::vector<Triple> triples;
    std::vector<std::string> warnings;
};

// Parses `subject<TAB>relation<TAB>object` lines. Unknown labels extend the
// vocabulary unless it is frozen, in which case `options.unknown` applies.
TripleFile parse_triples(std::istream& in, Vocab& vocab, const LoadOptions& options = {},
                         const std::string& source = "<stream>");
TripleFile load_triples(const std::filesystem::path& path, Vocab& vocab,
                        const LoadOptions& options = {});

void write_triples(std::ostream& out, std::span<const Triple> triples, const Vocab& vocab);

class TripleStore {
   public:
    TripleStore() = default;
    // Throws std::invalid_argument on out-of-vocabulary indices or on
    // duplicates inside one split.
    TripleStore(Vocab vocab, std::vector<Triple> train, std::vector<Triple> valid = {},
                std::vector<Triple> test = {});

    const Vocab& vocab() const { return vocab_; }
    std::size_t num_entities() const { return vocab_.num_entities(); }
    std::size_t num_relations() const { return vocab_.num_relations(); }
    bool augmented() const { return vocab_.inverse_augmented(); }

    std::span<const Triple> split(Split s) const;
    std::span<const Triple> train() const { return train_; }
    std::span<const Triple> valid() const { return valid_; }
    std::span<const Triple> test() const { return test_; }

    // Membership in the union of all splits. Throws std::out_of_range.
    bool is_known_fact(EntityId i, EntityId j, RelationId k) const;
    bool is_known_fact(const Triple& t) const {
        return is_known_fact(t.subject, t.object, t.relation);
    }
    bool is_train_fact(const Triple& t) const;

    std::size_t filter_size() const { return known_.size(); }

    friend TripleStore augment_inverse(const TripleStore& store);

   private:
    std::uint64_t key(const Triple& t) const;
    void check_bounds(const Triple& t) const;
    void build_index();

    Vocab vocab_;
    std::vector<Triple> train_;
    std::vector<Triple> valid_;
    std::vector<Triple> test_;
    std::unordered_set<std::uint64_t> known_;
    std::unordered_set<std::uint64_t> train_known_;
};

// Adds (j, i, k^-1) for every training triple; valid/test untouched.
// Throws std::logic_error when the store is already augmented.
TripleStore augment_inverse(const TripleStore& store);

// Loads train.txt (required), valid.txt and test.txt (optional) from `dir`.
// The vocabulary is built from train and frozen for the other splits.
struct Dataset {
    TripleStore store;
    std::vector<std::string> warnings;
};
Dataset load_dataset(const std::filesystem::path& dir, const LoadOptions& options = {});

}  // namespace bcp
