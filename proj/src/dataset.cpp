#include "qgil/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace qgil {

namespace {

void check_record(const Dataset& d, const DemoRecord& r) {
    require_size(r.state, static_cast<std::size_t>(d.state_dim), "record state");
    require_size(r.proposed_action, static_cast<std::size_t>(d.action_dim), "record proposed_action");
    require_size(r.expert_action, static_cast<std::size_t>(d.action_dim), "record expert_action");
    if (!all_finite(r.state) || !all_finite(r.proposed_action) || !all_finite(r.expert_action)) {
        throw ContractError("record contains non-finite entries");
    }
}

void append_values(std::string& line, const Vec& v) {
    char buf[40];
    for (double x : v) {
        std::snprintf(buf, sizeof(buf), ",%.17g", x);
        line += buf;
    }
}

}  // namespace

Dataset bootstrap(Environment& env, int episodes, RngStream& rng, std::uint64_t split_seed,
                  long long max_records) {
    if (episodes < 1) throw ConfigError("bootstrap: episodes must be >= 1");
    Dataset d;
    d.state_dim = env.spec().obs_dim;
    d.action_dim = env.spec().action_dim;
    d.split_seed = split_seed;
    for (int e = 0; e < episodes; ++e) {
        if (max_records > 0 && static_cast<long long>(d.size()) >= max_records) break;
        Vec obs = env.reset(rng);
        while (!env.done()) {
            if (max_records > 0 && static_cast<long long>(d.size()) >= max_records) break;
            const Vec action = env.expert_action();
            aggregate(d, DemoRecord{obs, action, action, 0, RecordSource::Bootstrap});
            obs = env.step(action).observation;
        }
    }
    return d;
}

void aggregate(Dataset& dataset, DemoRecord record) {
    check_record(dataset, record);
    dataset.records.push_back(std::move(record));
}

SplitIndices split(const Dataset& dataset, double val_fraction, std::uint64_t seed) {
    if (val_fraction < 0.0 || val_fraction >= 1.0) {
        throw ConfigError("split: val_fraction must be in [0,1)");
    }
    const std::size_t n = dataset.size();
    const auto val_size = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream rng(mix_seed(seed, 0x73706c69ULL));
    rng.shuffle(order);

    SplitIndices s;
    s.val.assign(order.begin(), order.begin() + val_size);
    s.train.assign(order.begin() + val_size, order.end());
    s.degenerate_val = val_size == 0;
    return s;
}

long long count_queries(const Dataset& dataset) {
    // Every record is one expert query, bootstrap or gated.
    return static_cast<long long>(dataset.size());
}

void save_dataset(const Dataset& dataset, std::ostream& out) {
    out << "# qgil-dataset m=" << dataset.state_dim << " n=" << dataset.action_dim
        << " split_seed=" << dataset.split_seed << "\n";
    out << "iteration,source";
    for (int i = 0; i < dataset.state_dim; ++i) out << ",s" << i;
    for (int i = 0; i < dataset.action_dim; ++i) out << ",a" << i;
    for (int i = 0; i < dataset.action_dim; ++i) out << ",e" << i;
    out << "\n";
    for (const DemoRecord& r : dataset.records) {
        std::string line = std::to_string(r.iteration);
        line += r.source == RecordSource::Bootstrap ? ",bootstrap" : ",queried";
        append_values(line, r.state);
        append_values(line, r.proposed_action);
        append_values(line, r.expert_action);
        out << line << "\n";
    }
}

Dataset load_dataset(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || header.rfind("# qgil-dataset", 0) != 0) {
        throw ContractError("load_dataset: missing header line");
    }
    Dataset d;
    {
        std::istringstream hs(header);
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("m=", 0) == 0) d.state_dim = std::stoi(tok.substr(2));
            if (tok.rfind("n=", 0) == 0) d.action_dim = std::stoi(tok.substr(2));
            if (tok.rfind("split_seed=", 0) == 0) d.split_seed = std::stoull(tok.substr(11));
        }
    }
    if (d.state_dim <= 0 || d.action_dim <= 0) throw ContractError("load_dataset: bad dims");

    std::string line;
    std::getline(in, line);  // column header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        DemoRecord r;
        std::getline(ls, cell, ',');
        r.iteration = std::stoi(cell);
        std::getline(ls, cell, ',');
        if (cell == "bootstrap") {
            r.source = RecordSource::Bootstrap;
        } else if (cell == "queried") {
            r.source = RecordSource::Queried;
        } else {
            throw ContractError("load_dataset: unknown source '" + cell + "'");
        }
        auto read_vec = [&](int n) {
            Vec v(n);
            for (int i = 0; i < n; ++i) {
                if (!std::getline(ls, cell, ',')) throw ContractError("load_dataset: short row");
                v[i] = std::stod(cell);
            }
            return v;
        };
        r.state = read_vec(d.state_dim);
        r.proposed_action = read_vec(d.action_dim);
        r.expert_action = read_vec(d.action_dim);
        aggregate(d, std::move(r));
    }
    return d;
}

void save_dataset_file(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ContractError("cannot open for write: " + path);
    save_dataset(dataset, out);
}

Dataset load_dataset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open for read: " + path);
    return load_dataset(in);
}

}  // namespace qgil
