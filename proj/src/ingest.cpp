#include "msb/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "msb/csvio.hpp"

namespace fs = std::filesystem;

namespace msb::ingest {

namespace {

constexpr double kTimeEps = 1e-9;

// First sample index whose time t = i / rate lies in [start_s, end_s).
std::size_t first_index_at_or_after(double start_s, double rate) {
    return static_cast<std::size_t>(std::max(0.0, std::ceil(start_s * rate - kTimeEps)));
}

std::size_t end_index_before(double end_s, double rate) {
    // Samples with i < end_s * rate.
    return static_cast<std::size_t>(std::max(0.0, std::ceil(end_s * rate - kTimeEps)));
}

}  // namespace

const ChannelSeries& SensorRecording::channel(ChannelKind k) const {
    auto it = channels.find(k);
    if (it == channels.end())
        throw MissingChannelError(std::string("channel '") + ingest::to_string(k) + "' absent");
    return it->second;
}

double SensorRecording::session_seconds() const {
    if (mask_applied) {
        return mask.intervals.empty() ? 0.0 : mask.intervals.back().end_s;
    }
    double dur = -1.0;
    for (const auto& [k, ch] : channels) {
        const double d = ch.duration_s();
        if (dur < 0.0 || d < dur) dur = d;
    }
    return std::max(dur, 0.0);
}

std::vector<Interval> SensorRecording::worn_segments() const {
    if (!mask.intervals.empty()) return mask.intervals;
    return {Interval{0.0, session_seconds()}};
}

double SensorRecording::worn_seconds() const {
    double total = 0.0;
    for (const auto& iv : worn_segments()) total += iv.length();
    return total;
}

std::vector<double> SensorRecording::window_values(ChannelKind k, double t0_s, double len_s) const {
    const ChannelSeries& ch = channel(k);
    const double rate = ch.rate_hz;
    const double t1_s = t0_s + len_s;
    const auto segments = worn_segments();
    // Locate the worn segment containing the window.
    std::size_t seg = segments.size();
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (t0_s >= segments[i].start_s - kTimeEps && t1_s <= segments[i].end_s + kTimeEps) {
            seg = i;
            break;
        }
    }
    if (seg == segments.size())
        throw RangeError("window [" + std::to_string(t0_s) + ", " + std::to_string(t1_s) +
                         ") does not lie inside a single worn segment");
    std::size_t base = 0;  // index of the segment's first sample in `values`
    if (mask_applied) {
        for (std::size_t i = 0; i < seg; ++i) {
            const std::size_t a = first_index_at_or_after(segments[i].start_s, rate);
            const std::size_t b = end_index_before(segments[i].end_s, rate);
            base += (b > a) ? b - a : 0;
        }
        const std::size_t seg_first = first_index_at_or_after(segments[seg].start_s, rate);
        const std::size_t w_first = first_index_at_or_after(t0_s, rate);
        base += w_first - seg_first;
    } else {
        base = first_index_at_or_after(t0_s, rate);
    }
    const std::size_t count = end_index_before(t1_s, rate) - first_index_at_or_after(t0_s, rate);
    if (base + count > ch.values.size())
        throw RangeError("window exceeds stored samples for channel " +
                         std::string(ingest::to_string(k)));
    return std::vector<double>(ch.values.begin() + static_cast<std::ptrdiff_t>(base),
                               ch.values.begin() + static_cast<std::ptrdiff_t>(base + count));
}

std::vector<ChannelSeries> load_channel_csv(const std::string& path, std::size_t n_columns,
                                            double scale) {
    const std::string text = csvio::read_file(path);
    // Header rows: start timestamp and sample rate, replicated across columns
    // in multi-column files; we read the first field of each.
    std::vector<std::vector<double>> header_cols;
    std::size_t first_eol = text.find('\n');
    std::size_t second_eol = first_eol == std::string::npos ? std::string::npos
                                                            : text.find('\n', first_eol + 1);
    if (first_eol == std::string::npos || second_eol == std::string::npos)
        throw FormatError("'" + path + "': missing E4 header rows");
    auto parse_header_value = [&](std::size_t lo, std::size_t hi) {
        std::string line = text.substr(lo, hi - lo);
        auto fields = csvio::split_csv_line(line);
        if (fields.empty() || fields[0].empty())
            throw FormatError("'" + path + "': empty header row");
        char* after = nullptr;
        const double v = std::strtod(fields[0].c_str(), &after);
        if (after == fields[0].c_str() || *after != '\0')
            throw FormatError("'" + path + "': non-numeric header value '" + fields[0] + "'");
        return v;
    };
    const double start_time = parse_header_value(0, first_eol);
    const double rate = parse_header_value(first_eol + 1, second_eol);
    if (!(rate > 0.0)) throw FormatError("'" + path + "': sample rate must be positive");

    std::vector<std::vector<double>> columns;
    csvio::parse_numeric_rows(text.substr(second_eol + 1), n_columns, columns);
    if (columns.empty() || columns[0].empty())
        throw EmptyChannelError("'" + path + "': no samples");

    std::vector<ChannelSeries> out;
    out.reserve(n_columns);
    for (auto& col : columns) {
        ChannelSeries s;
        s.start_time = start_time;
        s.rate_hz = rate;
        if (scale != 1.0)
            for (double& v : col) v *= scale;
        s.values = std::move(col);
        out.push_back(std::move(s));
    }
    return out;
}

void write_channel_csv(const std::string& path, const std::vector<ChannelSeries>& series) {
    if (series.empty()) throw ArgumentError("write_channel_csv: no series");
    std::string out;
    const std::size_t n = series[0].values.size();
    for (const auto& s : series)
        if (s.values.size() != n || s.rate_hz != series[0].rate_hz ||
            s.start_time != series[0].start_time)
            throw ShapeError("write_channel_csv: series disagree on shape or timing");
    auto append_repeated = [&](double v) {
        const std::string f = csvio::format_double(v);
        for (std::size_t c = 0; c < series.size(); ++c) {
            if (c) out += ',';
            out += f;
        }
        out += '\n';
    };
    append_repeated(series[0].start_time);
    append_repeated(series[0].rate_hz);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < series.size(); ++c) {
            if (c) out += ',';
            out += csvio::format_double(series[c].values[i]);
        }
        out += '\n';
    }
    csvio::write_file(path, out);
}

SensorRecording assemble_session(std::map<ChannelKind, ChannelSeries> channels,
                                 const std::string& participant_id, MoodState label,
                                 const WearMask& mask) {
    static const ChannelKind kAll[] = {ChannelKind::AccX, ChannelKind::AccY, ChannelKind::AccZ,
                                       ChannelKind::Eda, ChannelKind::Bvp, ChannelKind::Hr};
    for (ChannelKind k : kAll)
        if (!channels.count(k))
            throw MissingChannelError(std::string("channel '") + ingest::to_string(k) +
                                      "' missing from session");
    double common_start = -1.0;
    for (const auto& [k, ch] : channels) common_start = std::max(common_start, ch.start_time);
    for (auto& [k, ch] : channels) {
        const double lead = common_start - ch.start_time;
        const auto drop = static_cast<std::size_t>(std::llround(lead * ch.rate_hz));
        if (drop >= ch.values.size())
            throw EmptyChannelError(std::string("channel '") + ingest::to_string(k) +
                                    "' empty after start alignment");
        if (drop > 0) ch.values.erase(ch.values.begin(), ch.values.begin() + static_cast<std::ptrdiff_t>(drop));
        ch.start_time = common_start;
    }
    SensorRecording rec;
    rec.participant_id = participant_id;
    rec.label = label;
    rec.channels = std::move(channels);
    rec.mask = mask;
    return rec;
}

SensorRecording assemble_session(const std::string& session_dir, const std::string& participant_id,
                                 MoodState label, const WearMask& mask) {
    auto need = [&](const char* name) {
        const std::string p = session_dir + "/" + name;
        if (!fs::exists(p)) throw MissingChannelError("'" + p + "' not found");
        return p;
    };
    std::map<ChannelKind, ChannelSeries> channels;
    {
        auto acc = load_channel_csv(need("ACC.csv"), 3, 1.0 / 64.0);
        channels[ChannelKind::AccX] = std::move(acc[0]);
        channels[ChannelKind::AccY] = std::move(acc[1]);
        channels[ChannelKind::AccZ] = std::move(acc[2]);
    }
    channels[ChannelKind::Eda] = std::move(load_channel_csv(need("EDA.csv"), 1)[0]);
    channels[ChannelKind::Bvp] = std::move(load_channel_csv(need("BVP.csv"), 1)[0]);
    channels[ChannelKind::Hr] = std::move(load_channel_csv(need("HR.csv"), 1)[0]);
    return assemble_session(std::move(channels), participant_id, label, mask);
}

SensorRecording apply_wear_mask(const SensorRecording& rec) {
    if (rec.mask_applied) return rec;
    const double session_len = rec.session_seconds();
    // Clip intervals to the recorded session and validate the mask shape.
    std::vector<Interval> clipped;
    for (const auto& iv : rec.mask.intervals) {
        if (!(iv.end_s > iv.start_s)) throw ArgumentError("mask interval with end <= start");
        Interval c{std::max(iv.start_s, 0.0), std::min(iv.end_s, session_len)};
        if (c.end_s > c.start_s) clipped.push_back(c);
    }
    for (std::size_t i = 1; i < clipped.size(); ++i)
        if (clipped[i].start_s < clipped[i - 1].end_s)
            throw ArgumentError("mask intervals must be sorted and non-overlapping");
    if (clipped.empty())
        throw EmptyChannelError("wear mask excludes the entire recording");

    SensorRecording out;
    out.participant_id = rec.participant_id;
    out.label = rec.label;
    out.mask.intervals = clipped;
    out.mask_applied = true;
    for (const auto& [k, ch] : rec.channels) {
        ChannelSeries kept;
        kept.start_time = ch.start_time;
        kept.rate_hz = ch.rate_hz;
        for (const auto& iv : clipped) {
            const std::size_t a = first_index_at_or_after(iv.start_s, ch.rate_hz);
            const std::size_t b = std::min<std::size_t>(end_index_before(iv.end_s, ch.rate_hz),
                                                        ch.values.size());
            if (b > a)
                kept.values.insert(kept.values.end(), ch.values.begin() + static_cast<std::ptrdiff_t>(a),
                                   ch.values.begin() + static_cast<std::ptrdiff_t>(b));
        }
        if (kept.values.empty())
            throw EmptyChannelError(std::string("mask leaves channel '") + ingest::to_string(k) +
                                    "' empty");
        out.channels[k] = std::move(kept);
    }
    return out;
}

bool check_inclusion(const SensorRecording& rec, double min_hours) {
    return rec.worn_seconds() > min_hours * 3600.0;
}

WearMask load_mask_csv(const std::string& path) {
    std::vector<std::vector<double>> cols;
    csvio::parse_numeric_rows(csvio::read_file(path), 2, cols);
    WearMask m;
    for (std::size_t i = 0; i < cols[0].size(); ++i)
        m.intervals.push_back({cols[0][i], cols[1][i]});
    return m;
}

void write_mask_csv(const std::string& path, const WearMask& mask) {
    std::string out;
    for (const auto& iv : mask.intervals)
        out += csvio::format_double(iv.start_s) + "," + csvio::format_double(iv.end_s) + "\n";
    csvio::write_file(path, out);
}

SessionMeta load_meta(const std::string& path) {
    const std::string text = csvio::read_file(path);
    SessionMeta meta;
    bool have_id = false, have_label = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "participant_id") {
            meta.participant_id = val;
            have_id = true;
        } else if (key == "label") {
            meta.label = mood_state_from_string(val);
            have_label = true;
        }
    }
    if (!have_id || !have_label)
        throw FormatError("'" + path + "': need participant_id and label entries");
    return meta;
}

void write_meta(const std::string& path, const SessionMeta& meta) {
    csvio::write_file(path, "participant_id=" + meta.participant_id + "\nlabel=" +
                                to_string(meta.label) + "\n");
}

SensorRecording load_session(const std::string& session_dir) {
    const SessionMeta meta = load_meta(session_dir + "/meta.txt");
    const WearMask mask = load_mask_csv(session_dir + "/mask.csv");
    SensorRecording rec = assemble_session(session_dir, meta.participant_id, meta.label, mask);
    return apply_wear_mask(rec);
}

std::vector<std::string> list_cohort_sessions(const std::string& root) {
    if (!fs::is_directory(root)) throw IoError("cohort root '" + root + "' is not a directory");
    std::vector<std::string> dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && fs::exists(entry.path() / "meta.txt"))
            dirs.push_back(entry.path().string());
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

}  // namespace msb::ingest
