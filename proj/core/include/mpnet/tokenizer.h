#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace mpnet {

// Toy subword vocabulary. Ids are dense 0..V-1; the five reserved ids come
// first and are never produced by corpus frequency counting.
struct Vocab {
    static constexpr int kPad = 0;
    static constexpr int kMask = 1;
    static constexpr int kUnk = 2;
    static constexpr int kCls = 3;
    static constexpr int kSep = 4;
    static constexpr int kReserved = 5;

    std::vector<std::string> tokens;
    std::unordered_map<std::string, int> ids;

    int size() const { return static_cast<int>(tokens.size()); }
    int id_of(const std::string& s) const;
    const std::string& token(int id) const { return tokens.at(static_cast<size_t>(id)); }
    static bool is_special(int id) { return id >= 0 && id < kReserved; }

    void add(const std::string& s);

    // one token per line, line number = id
    void save(const std::string& path) const;
    static Vocab load(const std::string& path);
    static Vocab reserved_only();
};

// Greedy byte-pair vocabulary: reserved tokens, the corpus alphabet, then
// merges until target_size is reached or no pair is left. Ties between
// equally frequent pairs go to the lexicographically smaller pair.
Vocab build_vocab(const std::vector<std::string>& lines, size_t target_size);
Vocab build_vocab_file(const std::string& path, size_t target_size);

struct TokenizedSentence {
    std::vector<int> ids;
    std::vector<uint8_t> word_start;  // true where a token begins a whitespace word
};

// Greedy longest-match segmentation within each whitespace word; characters
// missing from the vocabulary become UNK.
TokenizedSentence encode(const Vocab& v, const std::string& text);
std::string decode(const Vocab& v, const TokenizedSentence& s);

// [CLS] ... [SEP]; both specials are single-token words
TokenizedSentence wrap_sentence(const TokenizedSentence& s);

struct BatchRow {
    std::vector<int> ids;             // length max_len, PAD tail
    std::vector<uint8_t> word_start;  // per slot
    std::vector<uint8_t> valid;       // 0 where PAD padding
    size_t valid_len = 0;
};

struct PackedCorpus {
    size_t max_len = 0;
    std::vector<BatchRow> rows;
};

// Packs consecutive wrapped sentences into rows of at most max_len tokens.
// A sentence that would overflow starts a new row; sentences are never
// split (a single overlong sentence is truncated, keeping its [SEP]).
PackedCorpus pack_corpus(const Vocab& v, const std::vector<std::string>& lines, size_t max_len);
PackedCorpus pack_sentences(const std::vector<TokenizedSentence>& wrapped, size_t max_len);

// Deterministic infinite row schedule: epoch e visits the rows in an order
// shuffled by (seed, e); step s consumes indices s*batch .. s*batch+batch-1
// of the concatenated schedule. Pure in (seed, step), so training can resume
// without carrying iterator state.
std::vector<size_t> batch_rows_for_step(size_t n_rows, size_t batch_size, uint64_t seed,
                                        size_t step);

struct TokenBatch {
    std::vector<std::vector<int>> ids;
    std::vector<std::vector<uint8_t>> word_start;
    std::vector<std::vector<uint8_t>> valid;
};

// Stream view over a packed corpus; yields batch_size rows per call in the
// batch_rows_for_step order.
class BatchIter {
public:
    BatchIter(const PackedCorpus& corpus, size_t batch_size, uint64_t seed);
    TokenBatch next();
    size_t step() const { return step_; }

private:
    const PackedCorpus& corpus_;
    size_t batch_size_;
    uint64_t seed_;
    size_t step_ = 0;
};

std::vector<std::string> read_lines(const std::string& path);

}  // namespace mpnet
