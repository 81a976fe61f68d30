#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qgil/common.hpp"
#include "qgil/env.hpp"
#include "qgil/rng.hpp"

namespace qgil {

enum class RecordSource { Bootstrap, Queried };

// One aggregated interaction tuple: the visited state, the action the agent
// proposed there, and what the expert would have done.
struct DemoRecord {
    Vec state;
    Vec proposed_action;
    Vec expert_action;
    int iteration = 0;
    RecordSource source = RecordSource::Bootstrap;

    bool operator==(const DemoRecord&) const = default;
};

// Append-only multiset of demonstration records. Every record corresponds to
// exactly one expert query, so query accounting is just counting records.
struct Dataset {
    std::vector<DemoRecord> records;
    std::uint64_t split_seed = 0;
    int state_dim = 0;
    int action_dim = 0;

    std::size_t size() const { return records.size(); }
    bool operator==(const Dataset&) const = default;
};

// Rolls out `episodes` full expert episodes and records every timestep with
// proposed_action == expert_action. `max_records` caps collection (query
// budget); <= 0 means no cap.
Dataset bootstrap(Environment& env, int episodes, RngStream& rng, std::uint64_t split_seed,
                  long long max_records = 0);

// Appends one record; prior records are never touched.
void aggregate(Dataset& dataset, DemoRecord record);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    bool degenerate_val = false;  // dataset too small for a non-empty val side
};

// Uniform shuffled partition with |val| = round(val_fraction * size).
// Deterministic per seed.
SplitIndices split(const Dataset& dataset, double val_fraction, std::uint64_t seed);

long long count_queries(const Dataset& dataset);

// Delimited text export, one record per line:
//   iteration,source,state...,proposed...,expert...
// Values are printed with round-trip precision.
void save_dataset(const Dataset& dataset, std::ostream& out);
Dataset load_dataset(std::istream& in);
void save_dataset_file(const Dataset& dataset, const std::string& path);
Dataset load_dataset_file(const std::string& path);

}  // namespace qgil
