#include "bcp/kg.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace bcp {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::optional<EntityId> Vocab::find_entity(std::string_view label) const {
    auto it = entity_ids_.find(std::string(label));
    if (it == entity_ids_.end()) return std::nullopt;
    return it->second;
}

std::optional<RelationId> Vocab::find_relation(std::string_view label) const {
    auto it = relation_ids_.find(std::string(label));
    if (it == relation_ids_.end()) return std::nullopt;
    return it->second;
}

EntityId Vocab::add_entity(std::string_view label) {
    if (auto id = find_entity(label)) return *id;
    if (frozen_) throw std::logic_error("vocabulary is frozen; cannot add entity '" + std::string(label) + "'");
    const auto id = static_cast<EntityId>(entity_labels_.size());
    entity_labels_.emplace_back(label);
    entity_ids_.emplace(entity_labels_.back(), id);
    return id;
}

RelationId Vocab::add_relation(std::string_view label) {
    if (auto id = find_relation(label)) return *id;
    if (frozen_) throw std::logic_error("vocabulary is frozen; cannot add relation '" + std::string(label) + "'");
    if (augmented_) throw std::logic_error("cannot add relations after inverse augmentation");
    const auto id = static_cast<RelationId>(relation_labels_.size());
    relation_labels_.emplace_back(label);
    relation_ids_.emplace(relation_labels_.back(), id);
    return id;
}

const std::string& Vocab::entity_label(EntityId id) const { return entity_labels_.at(id); }
const std::string& Vocab::relation_label(RelationId id) const { return relation_labels_.at(id); }

RelationId Vocab::inverse(RelationId k) const {
    if (!augmented_) throw std::logic_error("vocabulary has no inverse relations");
    if (k >= relation_labels_.size()) throw std::out_of_range("relation index out of range");
    const auto base = static_cast<RelationId>(base_relations());
    return k < base ? k + base : k - base;
}

void Vocab::augment_inverse() {
    if (augmented_) throw std::logic_error("inverse augmentation already applied");
    const std::size_t base = relation_labels_.size();
    for (std::size_t k = 0; k < base; ++k) {
        std::string label = relation_labels_[k] + "#inv";
        if (relation_ids_.count(label)) throw std::logic_error("relation label '" + label + "' already exists");
        relation_ids_.emplace(label, static_cast<RelationId>(relation_labels_.size()));
        relation_labels_.push_back(std::move(label));
    }
    augmented_ = true;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

}  // namespace

TripleFile parse_triples(std::istream& in, Vocab& vocab, const LoadOptions& options,
                         const std::string& source) {
    TripleFile result;
    std::set<Triple> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (view.empty()) continue;

        const auto fields = split_tabs(view);
        if (fields.size() != 3)
            throw ParseError(source, lineno,
                             "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
        for (auto f : fields)
            if (f.empty()) throw ParseError(source, lineno, "empty field");

        Triple t;
        if (vocab.frozen()) {
            auto s = vocab.find_entity(fields[0]);
            auto r = vocab.find_relation(fields[1]);
            auto o = vocab.find_entity(fields[2]);
            if (!s || !r || !o) {
                const std::string msg = "unknown label in '" + std::string(view) + "'";
                if (options.unknown == UnknownPolicy::Error) throw ParseError(source, lineno, msg);
                result.warnings.push_back(source + ":" + std::to_string(lineno) + ": skipped " + msg);
                continue;
            }
            t = {*s, *o, *r};
        } else {
            const auto s = vocab.add_entity(fields[0]);
            const auto r = vocab.add_relation(fields[1]);
            const auto o = vocab.add_entity(fields[2]);
            t = {s, o, r};
        }

        if (!seen.insert(t).second) {
            if (options.duplicates == DuplicatePolicy::Reject)
                throw ParseError(source, lineno, "duplicate triple '" + std::string(view) + "'");
            result.warnings.push_back(source + ":" + std::to_string(lineno) + ": dropped duplicate");
            continue;
        }
        result.triples.push_back(t);
    }
    return result;
}

TripleFile load_triples(const std::filesystem::path& path, Vocab& vocab, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return parse_triples(in, vocab, options, path.string());
}

void write_triples(std::ostream& out, std::span<const Triple> triples, const Vocab& vocab) {
    for (const auto& t : triples) {
        out << vocab.entity_label(t.subject) << '\t' << vocab.relation_label(t.relation) << '\t'
            << vocab.entity_label(t.object) << '\n';
    }
}

TripleStore::TripleStore(Vocab vocab, std::vector<Triple> train, std::vector<Triple> valid,
                         std::vector<Triple> test)
    : vocab_(std::move(vocab)), train_(std::move(train)), valid_(std::move(valid)), test_(std::move(test)) {
    for (const auto* part : {&train_, &valid_, &test_}) {
        std::unordered_set<std::uint64_t> local;
        for (const auto& t : *part) {
            check_bounds(t);
            if (!local.insert(key(t)).second) throw std::invalid_argument("duplicate triple within a split");
        }
    }
    build_index();
}

std::uint64_t TripleStore::key(const Triple& t) const {
    const std::uint64_t ne = vocab_.num_entities();
    const std::uint64_t nr = vocab_.num_relations();
    return (static_cast<std::uint64_t>(t.subject) * ne + t.object) * nr + t.relation;
}

void TripleStore::check_bounds(const Triple& t) const {
    if (t.subject >= vocab_.num_entities() || t.object >= vocab_.num_entities())
        throw std::out_of_range("entity index out of range");
    if (t.relation >= vocab_.num_relations()) throw std::out_of_range("relation index out of range");
}

void TripleStore::build_index() {
    known_.clear();
    train_known_.clear();
    known_.reserve(train_.size() + valid_.size() + test_.size());
    for (const auto& t : train_) {
        known_.insert(key(t));
        train_known_.insert(key(t));
    }
    for (const auto& t : valid_) known_.insert(key(t));
    for (const auto& t : test_) known_.insert(key(t));
}

std::span<const Triple> TripleStore::split(Split s) const {
    switch (s) {
        case Split::Train: return train_;
        case Split::Valid: return valid_;
        case Split::Test: return test_;
    }
    throw std::invalid_argument("bad split");
}

bool TripleStore::is_known_fact(EntityId i, EntityId j, RelationId k) const {
    const Triple t{i, j, k};
    check_bounds(t);
    return known_.count(key(t)) != 0;
}

bool TripleStore::is_train_fact(const Triple& t) const {
    check_bounds(t);
    return train_known_.count(key(t)) != 0;
}

TripleStore augment_inverse(const TripleStore& store) {
    Vocab vocab = store.vocab_;
    vocab.augment_inverse();
    std::vector<Triple> train(store.train_.begin(), store.train_.end());
    train.reserve(train.size() * 2);
    for (const auto& t : store.train_) train.push_back({t.object, t.subject, vocab.inverse(t.relation)});
    return TripleStore(std::move(vocab), std::move(train), store.valid_, store.test_);
}

Dataset load_dataset(const std::filesystem::path& dir, const LoadOptions& options) {
    const auto train_path = dir / "train.txt";
    if (!std::filesystem::exists(train_path)) throw std::runtime_error("missing " + train_path.string());

    Vocab vocab;
    Dataset out;
    auto train = load_triples(train_path, vocab, options);
    vocab.freeze();
    out.warnings = std::move(train.warnings);

    std::vector<Triple> valid, test;
    for (auto [name, dest] : {std::pair{"valid.txt", &valid}, std::pair{"test.txt", &test}}) {
        const auto path = dir / name;
        if (!std::filesystem::exists(path)) continue;
        auto file = load_triples(path, vocab, options);
        *dest = std::move(file.triples);
        out.warnings.insert(out.warnings.end(), file.warnings.begin(), file.warnings.end());
    }
    out.store = TripleStore(std::move(vocab), std::move(train.triples), std::move(valid), std::move(test));
    return out;
}

}  // namespace bcp
