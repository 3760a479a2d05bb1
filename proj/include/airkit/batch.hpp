// Aligned record of transmitted 4D symbol indices and received 4D vectors,
// with provenance metadata used to keep training and evaluation data
// disjoint.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace airkit {

struct BatchMeta {
    std::string scenario;     // canonical scenario text, or a file identifier
    std::uint64_t seed = 0;
    std::uint32_t batch_id = 0;
    std::string split;        // "", "train:<seed>", or "eval:<seed>"

    bool same_source(const BatchMeta& other) const {
        return scenario == other.scenario && seed == other.seed &&
               batch_id == other.batch_id;
    }

    // True when two batches may share samples. Halves of the same seeded
    // split are the only same-source combination known to be disjoint.
    bool overlaps(const BatchMeta& other) const;
};

struct SymbolBatch {
    std::vector<std::uint16_t> tx;  // 4D symbol indices
    std::vector<double> rx;         // N x 4, row-major [xI, xQ, yI, yQ]
    BatchMeta meta;

    std::size_t size() const { return tx.size(); }

    std::span<const double> rx_vector(std::size_t i) const {
        return {rx.data() + 4 * i, 4};
    }

    // Throws if sizes disagree, any index is >= m4d, or any coordinate is
    // non-finite.
    void validate(int m4d) const;

    // Subset by sample indices; the metadata split tag is replaced.
    SymbolBatch take(std::span<const std::uint32_t> indices,
                     const std::string& split_tag) const;
};

// Seeded disjoint split of one batch. `ratio` is the train fraction in
// (0,1); the same seed always yields the same permutation.
struct TrainEvalSplit {
    SymbolBatch train;
    SymbolBatch eval;
};
TrainEvalSplit split_batch(const SymbolBatch& batch, double ratio, std::uint64_t seed);

}  // namespace airkit
