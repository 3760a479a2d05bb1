#include "airkit/batch.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "airkit/rng.hpp"

namespace airkit {

bool BatchMeta::overlaps(const BatchMeta& other) const {
    if (!same_source(other)) return false;
    if (split.empty() || other.split.empty()) return true;  // a full batch overlaps anything
    if (split == other.split) return true;
    // train:<seed> and eval:<seed> of the same split are disjoint by
    // construction; different split seeds may share samples.
    const auto tag = [](const std::string& s) { return s.substr(0, s.find(':')); };
    const auto seed = [](const std::string& s) { return s.substr(s.find(':') + 1); };
    return !(tag(split) != tag(other.split) && seed(split) == seed(other.split));
}

void SymbolBatch::validate(int m4d) const {
    if (tx.empty()) throw std::invalid_argument("SymbolBatch: empty batch");
    if (rx.size() != 4 * tx.size())
        throw std::invalid_argument("SymbolBatch: rx/tx length mismatch (" +
                                    std::to_string(rx.size()) + " vs 4*" +
                                    std::to_string(tx.size()) + ")");
    for (std::size_t i = 0; i < tx.size(); ++i) {
        if (tx[i] >= m4d)
            throw std::invalid_argument("SymbolBatch: tx index " + std::to_string(tx[i]) +
                                        " at sample " + std::to_string(i) +
                                        " out of range [0, " + std::to_string(m4d) + ")");
    }
    for (std::size_t i = 0; i < rx.size(); ++i) {
        if (!std::isfinite(rx[i]))
            throw std::invalid_argument("SymbolBatch: non-finite coordinate at sample " +
                                        std::to_string(i / 4));
    }
}

SymbolBatch SymbolBatch::take(std::span<const std::uint32_t> indices,
                              const std::string& split_tag) const {
    SymbolBatch out;
    out.meta = meta;
    out.meta.split = split_tag;
    out.tx.reserve(indices.size());
    out.rx.reserve(4 * indices.size());
    for (std::uint32_t i : indices) {
        if (i >= tx.size()) throw std::out_of_range("SymbolBatch::take: index out of range");
        out.tx.push_back(tx[i]);
        for (int k = 0; k < 4; ++k) out.rx.push_back(rx[4 * static_cast<std::size_t>(i) + k]);
    }
    return out;
}

TrainEvalSplit split_batch(const SymbolBatch& batch, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw std::invalid_argument("split_batch: ratio must be in (0,1)");
    const std::size_t n = batch.size();
    const std::size_t n_train = static_cast<std::size_t>(ratio * static_cast<double>(n));
    if (n_train == 0 || n_train == n)
        throw std::invalid_argument("split_batch: batch too small for ratio");

    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    // Stream 0xA11 is reserved for train/eval permutations.
    seeded_shuffle(perm.data(), perm.size(), seed, 0xA11);

    const std::string seed_text = std::to_string(seed);
    TrainEvalSplit out;
    out.train = batch.take({perm.data(), n_train}, "train:" + seed_text);
    out.eval = batch.take({perm.data() + n_train, n - n_train}, "eval:" + seed_text);
    return out;
}

}  // namespace airkit
