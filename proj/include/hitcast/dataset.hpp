#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hitcast/errors.hpp"
#include "hitcast/rng.hpp"

namespace hitcast {

// ---------------------------------------------------------------------------
// Records

/// One track with its catalog metadata. extras holds fixture columns that are
/// not part of the model (key, mode, API ids...) until cleaning removes them.
struct TrackRecord {
    std::string track_id;
    std::string artist_id;
    double popularity = 0.0;  // 0-100 target
    double duration_ms = 0.0;
    double acousticness = 0.0;
    double danceability = 0.0;
    double energy = 0.0;
    double instrumentalness = 0.0;
    double liveness = 0.0;
    double loudness = 0.0;
    double speechiness = 0.0;
    double tempo = 0.0;
    double time_signature = 4.0;
    double valence = 0.0;
    double artist_popularity = 0.0;
    double artist_followers = 0.0;
    int release_year = 0;
    int release_month = 1;
    std::string audio_path;
    std::map<std::string, std::string> extras;
};

inline constexpr std::array<const char*, 19> kTracksCsvColumns = {
    "track_id",     "artist_id",       "popularity",     "duration_ms", "acousticness",
    "danceability", "energy",          "instrumentalness", "liveness",  "loudness",
    "speechiness",  "tempo",           "time_signature", "valence",     "artist_popularity",
    "artist_followers", "release_year", "release_month",  "audio_path"};

/// Model input features, canonical order. release_month is analysis-only and
/// popularity is the target, so neither appears here.
inline constexpr std::array<const char*, 14> kModelFeatureNames = {
    "duration_ms", "acousticness", "danceability",      "energy",
    "instrumentalness", "liveness", "loudness",         "speechiness",
    "tempo",       "time_signature", "valence",         "artist_popularity",
    "artist_followers", "release_year"};

inline std::vector<std::string> model_feature_names(bool with_artist_features = true) {
    std::vector<std::string> names;
    for (const char* n : kModelFeatureNames) {
        const std::string name = n;
        if (!with_artist_features && (name == "artist_popularity" || name == "artist_followers"))
            continue;
        names.push_back(name);
    }
    return names;
}

inline double model_feature(const TrackRecord& r, std::string_view name) {
    if (name == "duration_ms") return r.duration_ms;
    if (name == "acousticness") return r.acousticness;
    if (name == "danceability") return r.danceability;
    if (name == "energy") return r.energy;
    if (name == "instrumentalness") return r.instrumentalness;
    if (name == "liveness") return r.liveness;
    if (name == "loudness") return r.loudness;
    if (name == "speechiness") return r.speechiness;
    if (name == "tempo") return r.tempo;
    if (name == "time_signature") return r.time_signature;
    if (name == "valence") return r.valence;
    if (name == "artist_popularity") return r.artist_popularity;
    if (name == "artist_followers") return r.artist_followers;
    if (name == "release_year") return static_cast<double>(r.release_year);
    throw InvalidInputError("unknown model feature " + std::string(name));
}

inline std::vector<double> model_features(const TrackRecord& r,
                                          bool with_artist_features = true) {
    std::vector<double> out;
    for (const auto& name : model_feature_names(with_artist_features))
        out.push_back(model_feature(r, name));
    return out;
}

/// Empty string when every documented range holds, else a description.
inline std::string bounds_violation(const TrackRecord& r) {
    auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (r.popularity < 0.0 || r.popularity > 100.0) return "popularity outside 0-100";
    if (r.artist_popularity < 0.0 || r.artist_popularity > 100.0)
        return "artist_popularity outside 0-100";
    if (!unit(r.acousticness)) return "acousticness outside 0-1";
    if (!unit(r.danceability)) return "danceability outside 0-1";
    if (!unit(r.energy)) return "energy outside 0-1";
    if (!unit(r.instrumentalness)) return "instrumentalness outside 0-1";
    if (!unit(r.liveness)) return "liveness outside 0-1";
    if (!unit(r.speechiness)) return "speechiness outside 0-1";
    if (!unit(r.valence)) return "valence outside 0-1";
    if (r.artist_followers < 0.0) return "artist_followers negative";
    if (r.release_month < 1 || r.release_month > 12) return "release_month outside 1-12";
    if (r.artist_id.empty()) return "artist_id empty";
    return "";
}

struct LoadResult {
    std::vector<TrackRecord> records;
    std::size_t dropped_incomplete = 0;
};

// ---------------------------------------------------------------------------
// Catalog fixture (JSON)

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* key,
                                           const std::string& path) {
    if (!obj.is_object() || !obj.contains(key))
        throw SchemaError(path + "." + key + " is missing");
    return obj.at(key);
}

inline std::string require_string(const nlohmann::json& obj, const char* key,
                                  const std::string& path) {
    const auto& v = require_field(obj, key, path);
    if (!v.is_string()) throw SchemaError(path + "." + key + " must be a string");
    return v.get<std::string>();
}

/// Numeric field; a JSON null marks the record incomplete instead of erroring.
inline double fixture_number(const nlohmann::json& obj, const char* key,
                             const std::string& path, bool& incomplete) {
    const auto& v = require_field(obj, key, path);
    if (v.is_null()) {
        incomplete = true;
        return 0.0;
    }
    if (!v.is_number()) throw SchemaError(path + "." + key + " must be a number");
    return v.get<double>();
}

}  // namespace detail

/// Flatten the {"artists": [... {"tracks": [...]}]} fixture into track
/// records. Tracks with a null feature are dropped and counted; missing
/// fields are schema errors naming the path.
inline LoadResult load_catalog_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("catalog is not valid JSON: " + std::string(e.what()));
    }
    const auto& artists = detail::require_field(doc, "artists", "catalog");
    if (!artists.is_array()) throw SchemaError("catalog.artists must be an array");

    static const std::set<std::string> known_track_fields = {
        "track_id",     "popularity", "duration_ms", "acousticness",  "danceability",
        "energy",       "instrumentalness", "liveness", "loudness",   "speechiness",
        "tempo",        "time_signature", "valence",  "release_year", "release_month",
        "audio_path"};

    LoadResult out;
    std::set<std::string> seen_ids;
    for (std::size_t a = 0; a < artists.size(); ++a) {
        const std::string apath = "artists[" + std::to_string(a) + "]";
        const auto& artist = artists[a];
        const std::string artist_id = detail::require_string(artist, "artist_id", apath);
        if (artist_id.empty()) throw SchemaError(apath + ".artist_id is empty");
        detail::require_string(artist, "name", apath);
        bool artist_incomplete = false;
        const double artist_popularity =
            detail::fixture_number(artist, "artist_popularity", apath, artist_incomplete);
        const double artist_followers =
            detail::fixture_number(artist, "artist_followers", apath, artist_incomplete);
        const auto& tracks = detail::require_field(artist, "tracks", apath);
        if (!tracks.is_array()) throw SchemaError(apath + ".tracks must be an array");

        for (std::size_t t = 0; t < tracks.size(); ++t) {
            const std::string tpath = apath + ".tracks[" + std::to_string(t) + "]";
            const auto& track = tracks[t];
            bool incomplete = artist_incomplete;
            TrackRecord r;
            r.artist_id = artist_id;
            r.artist_popularity = artist_popularity;
            r.artist_followers = artist_followers;
            r.track_id = detail::require_string(track, "track_id", tpath);
            r.popularity = detail::fixture_number(track, "popularity", tpath, incomplete);
            r.duration_ms = detail::fixture_number(track, "duration_ms", tpath, incomplete);
            r.acousticness = detail::fixture_number(track, "acousticness", tpath, incomplete);
            r.danceability = detail::fixture_number(track, "danceability", tpath, incomplete);
            r.energy = detail::fixture_number(track, "energy", tpath, incomplete);
            r.instrumentalness =
                detail::fixture_number(track, "instrumentalness", tpath, incomplete);
            r.liveness = detail::fixture_number(track, "liveness", tpath, incomplete);
            r.loudness = detail::fixture_number(track, "loudness", tpath, incomplete);
            r.speechiness = detail::fixture_number(track, "speechiness", tpath, incomplete);
            r.tempo = detail::fixture_number(track, "tempo", tpath, incomplete);
            r.time_signature =
                detail::fixture_number(track, "time_signature", tpath, incomplete);
            r.valence = detail::fixture_number(track, "valence", tpath, incomplete);
            r.release_year = static_cast<int>(
                std::llround(detail::fixture_number(track, "release_year", tpath, incomplete)));
            r.release_month = static_cast<int>(std::llround(
                detail::fixture_number(track, "release_month", tpath, incomplete)));
            r.audio_path = detail::require_string(track, "audio_path", tpath);
            for (const auto& [key, value] : track.items())
                if (!known_track_fields.count(key))
                    r.extras[key] =
                        value.is_string() ? value.get<std::string>() : value.dump();

            if (incomplete) {
                ++out.dropped_incomplete;
                continue;
            }
            const std::string violation = bounds_violation(r);
            if (!violation.empty()) throw SchemaError(tpath + ": " + violation);
            if (!seen_ids.insert(r.track_id).second)
                throw DuplicateIdError("duplicate track_id " + r.track_id);
            out.records.push_back(std::move(r));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tracks CSV

namespace detail {

inline std::vector<std::vector<std::string>> parse_csv_text(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
            continue;
        }
        switch (c) {
            case '"': quoted = true; break;
            case ',': row.push_back(std::move(cell)); cell.clear(); break;
            case '\r': break;
            case '\n':
                row.push_back(std::move(cell));
                cell.clear();
                rows.push_back(std::move(row));
                row.clear();
                break;
            default: cell += c;
        }
    }
    if (quoted) throw CsvParseError("unterminated quoted cell");
    if (!cell.empty() || !row.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string fmt_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline double csv_double(const std::string& cell, std::size_t row, const char* column) {
    double x = 0.0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
    if (ec != std::errc{} || end != cell.data() + cell.size())
        throw CsvParseError("row " + std::to_string(row) + ", column " + column +
                            " is not numeric: '" + cell + "'");
    return x;
}

inline int csv_int(const std::string& cell, std::size_t row, const char* column) {
    int x = 0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
    if (ec != std::errc{} || end != cell.data() + cell.size())
        throw CsvParseError("row " + std::to_string(row) + ", column " + column +
                            " is not an integer: '" + cell + "'");
    return x;
}

}  // namespace detail

/// Strict 19-column reader. Rows missing any required value are dropped and
/// counted; malformed cells are errors with the offending row number (the
/// header is row 1).
inline LoadResult load_tracks_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    const auto rows = detail::parse_csv_text(ss.str());
    if (rows.empty()) throw SchemaError("tracks CSV has no header row");

    const auto& header = rows[0];
    for (std::size_t i = 0; i < header.size() && i < kTracksCsvColumns.size(); ++i)
        if (header[i] != kTracksCsvColumns[i])
            throw SchemaError("unknown column '" + header[i] + "' at position " +
                              std::to_string(i + 1) + ", expected '" + kTracksCsvColumns[i] +
                              "'");
    if (header.size() != kTracksCsvColumns.size())
        throw SchemaError("tracks CSV has " + std::to_string(header.size()) +
                          " columns, expected " + std::to_string(kTracksCsvColumns.size()));

    LoadResult out;
    std::set<std::string> seen_ids;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() == 1 && row[0].empty()) continue;  // blank line
        const std::size_t rownum = i + 1;
        if (row.size() != kTracksCsvColumns.size())
            throw CsvParseError("row " + std::to_string(rownum) + " has " +
                                std::to_string(row.size()) + " cells, expected " +
                                std::to_string(kTracksCsvColumns.size()));

        // every value except audio_path is required
        bool incomplete = false;
        for (std::size_t c = 0; c + 1 < row.size(); ++c) incomplete = incomplete || row[c].empty();
        if (incomplete) {
            ++out.dropped_incomplete;
            continue;
        }

        TrackRecord r;
        r.track_id = row[0];
        r.artist_id = row[1];
        r.popularity = detail::csv_double(row[2], rownum, "popularity");
        r.duration_ms = detail::csv_double(row[3], rownum, "duration_ms");
        r.acousticness = detail::csv_double(row[4], rownum, "acousticness");
        r.danceability = detail::csv_double(row[5], rownum, "danceability");
        r.energy = detail::csv_double(row[6], rownum, "energy");
        r.instrumentalness = detail::csv_double(row[7], rownum, "instrumentalness");
        r.liveness = detail::csv_double(row[8], rownum, "liveness");
        r.loudness = detail::csv_double(row[9], rownum, "loudness");
        r.speechiness = detail::csv_double(row[10], rownum, "speechiness");
        r.tempo = detail::csv_double(row[11], rownum, "tempo");
        r.time_signature = detail::csv_double(row[12], rownum, "time_signature");
        r.valence = detail::csv_double(row[13], rownum, "valence");
        r.artist_popularity = detail::csv_double(row[14], rownum, "artist_popularity");
        r.artist_followers = detail::csv_double(row[15], rownum, "artist_followers");
        r.release_year = detail::csv_int(row[16], rownum, "release_year");
        r.release_month = detail::csv_int(row[17], rownum, "release_month");
        r.audio_path = row[18];

        const std::string violation = bounds_violation(r);
        if (!violation.empty())
            throw CsvParseError("row " + std::to_string(rownum) + ": " + violation);
        if (!seen_ids.insert(r.track_id).second)
            throw DuplicateIdError("duplicate track_id " + r.track_id);
        out.records.push_back(std::move(r));
    }
    return out;
}

/// %.17g cells so a write/read cycle reproduces every double bit-for-bit.
inline void write_tracks_csv(const std::filesystem::path& path,
                             const std::vector<TrackRecord>& records) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    for (std::size_t i = 0; i < kTracksCsvColumns.size(); ++i)
        os << (i ? "," : "") << kTracksCsvColumns[i];
    os << "\n";
    for (const auto& r : records) {
        os << detail::csv_escape(r.track_id) << "," << detail::csv_escape(r.artist_id) << ","
           << detail::fmt_g17(r.popularity) << "," << detail::fmt_g17(r.duration_ms) << ","
           << detail::fmt_g17(r.acousticness) << "," << detail::fmt_g17(r.danceability) << ","
           << detail::fmt_g17(r.energy) << "," << detail::fmt_g17(r.instrumentalness) << ","
           << detail::fmt_g17(r.liveness) << "," << detail::fmt_g17(r.loudness) << ","
           << detail::fmt_g17(r.speechiness) << "," << detail::fmt_g17(r.tempo) << ","
           << detail::fmt_g17(r.time_signature) << "," << detail::fmt_g17(r.valence) << ","
           << detail::fmt_g17(r.artist_popularity) << "," << detail::fmt_g17(r.artist_followers)
           << "," << r.release_year << "," << r.release_month << ","
           << detail::csv_escape(r.audio_path) << "\n";
    }
    if (!os) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Cleaning

namespace detail {

inline std::string lowercase(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline bool is_excluded_extra(const std::string& key) {
    const std::string k = lowercase(key);
    if (k == "key" || k == "mode") return true;
    return k.find("id") != std::string::npos || k.find("uri") != std::string::npos ||
           k.find("url") != std::string::npos || k.find("href") != std::string::npos;
}

}  // namespace detail

/// Drop key, mode and API-reference extras; model features, target and
/// identifiers pass through untouched. Idempotent and order-preserving.
inline std::vector<TrackRecord> clean_records(std::vector<TrackRecord> records) {
    for (auto& r : records)
        std::erase_if(r.extras,
                      [](const auto& kv) { return detail::is_excluded_extra(kv.first); });
    return records;
}

// ---------------------------------------------------------------------------
// Artist-disjoint split

struct DatasetSplit {
    std::vector<TrackRecord> train, test;
    std::uint64_t seed = 0;
    double achieved_train_fraction = 0.0;
};

inline constexpr std::uint64_t kSplitStream = 0x73706c6974;

/// Shuffle artists by seed, then assign whole artists to train until the
/// train side reaches the requested track fraction; everyone else is test.
/// At least one artist always stays on the test side.
inline DatasetSplit split_by_artist(const std::vector<TrackRecord>& records,
                                    double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw SplitError("train fraction must be inside (0, 1)");
    std::vector<std::string> artists;
    std::map<std::string, std::size_t> track_count;
    for (const auto& r : records) {
        if (!track_count.count(r.artist_id)) artists.push_back(r.artist_id);
        ++track_count[r.artist_id];
    }
    if (artists.size() < 2)
        throw SplitError("artist-disjoint split needs at least 2 distinct artists, got " +
                         std::to_string(artists.size()));

    Rng rng(mix_seed(seed, kSplitStream));
    shuffle(artists, rng);

    const double target = train_fraction * static_cast<double>(records.size());
    std::set<std::string> train_artists;
    std::size_t train_tracks = 0;
    for (std::size_t i = 0; i + 1 < artists.size(); ++i) {
        if (static_cast<double>(train_tracks) >= target) break;
        train_artists.insert(artists[i]);
        train_tracks += track_count[artists[i]];
    }

    DatasetSplit split;
    split.seed = seed;
    for (const auto& r : records)
        (train_artists.count(r.artist_id) ? split.train : split.test).push_back(r);
    split.achieved_train_fraction =
        records.empty() ? 0.0
                        : static_cast<double>(split.train.size()) /
                              static_cast<double>(records.size());
    return split;
}

// ---------------------------------------------------------------------------
// Feature scaling

/// Per-feature z-score transform, fit on training rows only. Population
/// standard deviation.
struct FeatureScaler {
    std::vector<std::string> names;
    std::vector<double> mean, stddev;
    bool with_artist_features = true;
    bool fitted() const { return !names.empty(); }
};

inline FeatureScaler fit_scaler(const std::vector<TrackRecord>& train,
                                bool with_artist_features = true) {
    if (train.empty()) throw InvalidInputError("fit_scaler: no training rows");
    FeatureScaler s;
    s.with_artist_features = with_artist_features;
    s.names = model_feature_names(with_artist_features);
    const std::size_t d = s.names.size();
    const double n = static_cast<double>(train.size());
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
    for (const auto& r : train)
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += model_feature(r, s.names[j]);
    for (double& m : s.mean) m /= n;
    for (const auto& r : train)
        for (std::size_t j = 0; j < d; ++j) {
            const double dlt = model_feature(r, s.names[j]) - s.mean[j];
            s.stddev[j] += dlt * dlt;
        }
    for (std::size_t j = 0; j < d; ++j) {
        s.stddev[j] = std::sqrt(s.stddev[j] / n);
        if (s.stddev[j] <= 0.0)
            throw DegenerateFeatureError(s.names[j] + " is constant across the training rows");
    }
    return s;
}

inline std::vector<double> apply_scaler(const FeatureScaler& s, const TrackRecord& r) {
    if (!s.fitted()) throw StateError("apply_scaler: scaler has not been fit");
    std::vector<double> out(s.names.size());
    for (std::size_t j = 0; j < s.names.size(); ++j)
        out[j] = (model_feature(r, s.names[j]) - s.mean[j]) / s.stddev[j];
    return out;
}

inline std::vector<double> unscale_features(const FeatureScaler& s,
                                            const std::vector<double>& scaled) {
    if (!s.fitted()) throw StateError("unscale_features: scaler has not been fit");
    if (scaled.size() != s.names.size())
        throw ShapeError("unscale_features: width mismatch");
    std::vector<double> out(scaled.size());
    for (std::size_t j = 0; j < scaled.size(); ++j)
        out[j] = scaled[j] * s.stddev[j] + s.mean[j];
    return out;
}

inline void write_scaler_csv(const std::filesystem::path& path, const FeatureScaler& s) {
    if (!s.fitted()) throw StateError("write_scaler_csv: scaler has not been fit");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    os << "feature,mean,stddev\n";
    for (std::size_t j = 0; j < s.names.size(); ++j)
        os << s.names[j] << "," << detail::fmt_g17(s.mean[j]) << ","
           << detail::fmt_g17(s.stddev[j]) << "\n";
}

inline FeatureScaler read_scaler_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    const auto rows = detail::parse_csv_text(ss.str());
    if (rows.empty() || rows[0] != std::vector<std::string>{"feature", "mean", "stddev"})
        throw SchemaError("not a scaler file: " + path.string());
    FeatureScaler s;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() == 1 && rows[i][0].empty()) continue;
        if (rows[i].size() != 3)
            throw CsvParseError("scaler row " + std::to_string(i + 1) + " malformed");
        s.names.push_back(rows[i][0]);
        s.mean.push_back(detail::csv_double(rows[i][1], i + 1, "mean"));
        s.stddev.push_back(detail::csv_double(rows[i][2], i + 1, "stddev"));
    }
    if (!s.fitted()) throw SchemaError("scaler file has no feature rows");
    s.with_artist_features =
        std::find(s.names.begin(), s.names.end(), "artist_popularity") != s.names.end();
    return s;
}

// ---------------------------------------------------------------------------
// Batching

inline constexpr std::uint64_t kBatchStream = 0xba7c4000;

/// Index batches for one epoch: a seeded permutation (or input order) chopped
/// into batch_size pieces, final partial batch kept.
inline std::vector<std::vector<std::size_t>> batch_indices(std::size_t n,
                                                           std::size_t batch_size,
                                                           std::uint64_t seed,
                                                           std::uint64_t epoch,
                                                           bool shuffle_order) {
    if (batch_size == 0) throw InvalidInputError("batch size must be >= 1");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (shuffle_order) {
        Rng rng(mix_seed(seed, kBatchStream + epoch));
        shuffle(order, rng);
    }
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t stop = std::min(n, start + batch_size);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(stop));
    }
    return batches;
}

}  // namespace hitcast
