#include "msb/featurecache.hpp"

#include <algorithm>
#include <filesystem>

#include "msb/csvio.hpp"
#include "msb/parallel.hpp"

namespace fs = std::filesystem;

namespace msb::cache {

std::string LongSpec::key() const {
    std::string out;
    for (feat::Sensor s : sensors) {
        if (!out.empty()) out += '+';
        out += feat::to_string(s);
    }
    out += '.';
    out += feat::to_string(set);
    if (grid == Grid::Short20h) out += ".short20h";
    return out;
}

ParticipantFeatures extract_participant(const ingest::SensorRecording& recording,
                                        const std::vector<LongSpec>& specs,
                                        const feat::FeatureParams& params) {
    const feat::PreprocessedRecording pre = feat::preprocess(recording, params);
    ParticipantFeatures pf;
    pf.id = pre.participant_id;
    pf.label = pre.label;
    pf.short_windows = feat::short_example_windows(pre);
    const std::vector<feat::Window> sliding = feat::sliding_long_windows(pre);
    std::vector<feat::Window> short20h;
    for (const auto& w : pf.short_windows)
        if (w.length_s == 20.0 * 3600.0) short20h.push_back(w);

    pf.long_windows.resize(specs.size());
    pf.long_vectors.resize(specs.size());
    pf.long_names.resize(specs.size());
    for (std::size_t si = 0; si < specs.size(); ++si) {
        pf.long_windows[si] =
            specs[si].grid == LongSpec::Grid::LongSliding ? sliding : short20h;
        pf.long_vectors[si].resize(pf.long_windows[si].size());
        for (std::size_t wi = 0; wi < pf.long_windows[si].size(); ++wi) {
            try {
                feat::FeatureVector v = feat::extract_long_vector(
                    pre, specs[si].sensors, specs[si].set, pf.long_windows[si][wi], params);
                if (pf.long_names[si].empty()) pf.long_names[si] = v.names;
                pf.long_vectors[si][wi] = std::move(v.values);
            } catch (const Error&) {
                ++pf.degenerate_long_windows;  // window skipped for this spec
            }
        }
    }

    pf.segment_cells.resize(pre.segments.size());
    for (std::size_t seg = 0; seg < pre.segments.size(); ++seg) {
        const auto n_cells =
            static_cast<std::size_t>(std::floor(pre.segments[seg].length() / 300.0 + 1e-9));
        pf.segment_cells[seg].reserve(n_cells);
        for (std::size_t c = 0; c < n_cells; ++c)
            pf.segment_cells[seg].push_back(
                feat::compute_short_cell(pre, seg, static_cast<double>(c) * 300.0, 300.0, params));
    }
    return pf;
}

namespace {

std::string fmt(double v) { return csvio::format_double(v); }

void save_long(const std::string& path, const ParticipantFeatures& pf, std::size_t si) {
    csvio::Table t;
    t.header = {"window", "segment", "start_s", "length_s"};
    for (const auto& n : pf.long_names[si]) t.header.push_back(n);
    for (std::size_t wi = 0; wi < pf.long_windows[si].size(); ++wi) {
        if (pf.long_vectors[si][wi].empty()) continue;  // degenerate: row omitted
        std::vector<std::string> row = {std::to_string(wi),
                                        std::to_string(pf.long_windows[si][wi].segment),
                                        fmt(pf.long_windows[si][wi].start_s),
                                        fmt(pf.long_windows[si][wi].length_s)};
        for (double v : pf.long_vectors[si][wi]) row.push_back(fmt(v));
        t.rows.push_back(std::move(row));
    }
    csvio::write_table(path, t);
}

void save_cells(const std::string& path, const ParticipantFeatures& pf) {
    csvio::Table t;
    t.header = {"segment", "cell", "acc_ok", "eda_ok"};
    for (const auto& n : feat::short_matrix_feature_names()) t.header.push_back(n);
    for (std::size_t seg = 0; seg < pf.segment_cells.size(); ++seg)
        for (std::size_t c = 0; c < pf.segment_cells[seg].size(); ++c) {
            const auto& cell = pf.segment_cells[seg][c];
            std::vector<std::string> row = {std::to_string(seg), std::to_string(c),
                                            cell.acc_ok ? "1" : "0", cell.eda_ok ? "1" : "0"};
            for (double v : cell.values) row.push_back(fmt(v));
            t.rows.push_back(std::move(row));
        }
    csvio::write_table(path, t);
}

}  // namespace

void save_participant(const std::string& dir, const ParticipantFeatures& pf,
                      const std::vector<LongSpec>& specs) {
    fs::create_directories(dir);
    // Manifest: identity, label and the window grids.
    csvio::Table manifest;
    manifest.header = {"key", "value"};
    manifest.rows.push_back({"participant", pf.id});
    manifest.rows.push_back({"label", to_string(pf.label)});
    manifest.rows.push_back({"degenerate_long_windows",
                             std::to_string(pf.degenerate_long_windows)});
    manifest.rows.push_back({"segments", std::to_string(pf.segment_cells.size())});
    csvio::write_table(dir + "/manifest.csv", manifest);

    csvio::Table windows;
    windows.header = {"kind", "segment", "start_s", "length_s"};
    for (std::size_t si = 0; si < pf.long_windows.size(); ++si)
        for (const auto& w : pf.long_windows[si])
            windows.rows.push_back({"long" + std::to_string(si), std::to_string(w.segment),
                                    fmt(w.start_s), fmt(w.length_s)});
    for (const auto& w : pf.short_windows)
        windows.rows.push_back({"short", std::to_string(w.segment), fmt(w.start_s),
                                fmt(w.length_s)});
    csvio::write_table(dir + "/windows.csv", windows);

    for (std::size_t si = 0; si < specs.size(); ++si)
        save_long(dir + "/long_" + specs[si].key() + ".csv", pf, si);
    save_cells(dir + "/cells.csv", pf);
}

std::optional<ParticipantFeatures> load_participant(const std::string& dir,
                                                    const std::vector<LongSpec>& specs) {
    if (!fs::exists(dir + "/manifest.csv")) return std::nullopt;
    for (const auto& spec : specs)
        if (!fs::exists(dir + "/long_" + spec.key() + ".csv")) return std::nullopt;
    if (!fs::exists(dir + "/cells.csv") || !fs::exists(dir + "/windows.csv"))
        return std::nullopt;

    ParticipantFeatures pf;
    std::size_t n_segments = 0;
    for (const auto& row : csvio::read_table(dir + "/manifest.csv").rows) {
        if (row[0] == "participant") pf.id = row[1];
        if (row[0] == "label") pf.label = mood_state_from_string(row[1]);
        if (row[0] == "degenerate_long_windows")
            pf.degenerate_long_windows = std::stoull(row[1]);
        if (row[0] == "segments") n_segments = std::stoull(row[1]);
    }
    pf.long_windows.resize(specs.size());
    for (const auto& row : csvio::read_table(dir + "/windows.csv").rows) {
        feat::Window w{std::stoull(row[1]), std::stod(row[2]), std::stod(row[3])};
        if (row[0] == "short") {
            pf.short_windows.push_back(w);
        } else {
            const std::size_t si = std::stoull(row[0].substr(4));
            if (si >= specs.size()) return std::nullopt;  // stale cache layout
            pf.long_windows[si].push_back(w);
        }
    }
    pf.long_vectors.resize(specs.size());
    pf.long_names.resize(specs.size());
    for (std::size_t si = 0; si < specs.size(); ++si) {
        const auto table = csvio::read_table(dir + "/long_" + specs[si].key() + ".csv");
        pf.long_names[si].assign(table.header.begin() + 4, table.header.end());
        pf.long_vectors[si].assign(pf.long_windows[si].size(), {});
        for (const auto& row : table.rows) {
            const std::size_t wi = std::stoull(row[0]);
            if (wi >= pf.long_windows[si].size()) throw FormatError("cache window out of range");
            std::vector<double> v;
            for (std::size_t c = 4; c < row.size(); ++c) v.push_back(std::stod(row[c]));
            pf.long_vectors[si][wi] = std::move(v);
        }
    }
    pf.segment_cells.resize(n_segments);
    for (const auto& row : csvio::read_table(dir + "/cells.csv").rows) {
        const std::size_t seg = std::stoull(row[0]);
        if (seg >= pf.segment_cells.size()) throw FormatError("cache segment out of range");
        feat::ShortCell cell;
        cell.acc_ok = row[2] == "1";
        cell.eda_ok = row[3] == "1";
        for (std::size_t c = 0; c < 11; ++c) cell.values[c] = std::stod(row[4 + c]);
        pf.segment_cells[seg].push_back(cell);
    }
    return pf;
}

FeatureStore build_store(const std::string& cohort_root, const std::vector<LongSpec>& specs,
                         const feat::FeatureParams& params, const std::string& cache_dir,
                         std::size_t jobs) {
    const auto sessions = ingest::list_cohort_sessions(cohort_root);
    if (sessions.empty()) throw IoError("no sessions under '" + cohort_root + "'");
    FeatureStore store(sessions.size());
    parallel_for_tasks(sessions.size(), jobs, [&](std::size_t i) {
        const std::string name = fs::path(sessions[i]).filename().string();
        const std::string pdir = cache_dir.empty() ? "" : cache_dir + "/" + name;
        if (!pdir.empty()) {
            if (auto cached = load_participant(pdir, specs)) {
                store[i] = std::move(*cached);
                return;
            }
        }
        const ingest::SensorRecording rec = ingest::load_session(sessions[i]);
        if (!ingest::check_inclusion(rec))
            throw ValidationError("participant '" + rec.participant_id +
                                  "' fails the >20h inclusion rule");
        store[i] = extract_participant(rec, specs, params);
        if (!pdir.empty()) save_participant(pdir, store[i], specs);
    });
    return store;
}

}  // namespace msb::cache
