#include "ser/dataio.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "ser/errors.hpp"

namespace ser {

namespace {

std::vector<std::string> split_csv_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_cell(const std::string& cell, std::size_t data_row, const std::string& col) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("non-numeric feature cell '" + cell + "' at row " +
                         std::to_string(data_row) + ", column " + col);
    return value;
}

}  // namespace

FeatureTable load_feature_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open feature file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty feature file: " + path);
    const auto header = split_csv_line(line);
    const std::vector<std::string> meta{"id", "speaker", "session", "label"};
    if (header.size() < 4)
        throw ParseError(path + ": header must start with id,speaker,session,label");
    for (std::size_t i = 0; i < 4; ++i)
        if (header[i] != meta[i])
            throw ParseError(path + ": header column " + std::to_string(i + 1) + " must be '" +
                             meta[i] + "', got '" + header[i] + "'");
    std::vector<std::string> names(header.begin() + 4, header.end());
    {
        std::unordered_set<std::string> seen;
        for (const auto& nm : names)
            if (!seen.insert(nm).second)
                throw ParseError(path + ": duplicate feature column '" + nm + "'");
    }
    const std::size_t m = names.size();

    std::vector<Utterance> rows;
    std::vector<double> cells;
    std::unordered_set<std::string> ids;
    std::size_t data_row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++data_row;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4 + m)
            throw ParseError(path + ": row " + std::to_string(data_row) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(4 + m));
        if (!ids.insert(fields[0]).second)
            throw ParseError(path + ": duplicate id '" + fields[0] + "'");
        rows.push_back({fields[0], fields[1], fields[2], fields[3]});
        for (std::size_t c = 0; c < m; ++c) {
            const double v = parse_cell(fields[4 + c], data_row, names[c]);
            if (!std::isfinite(v))
                throw ParseError(path + ": non-finite value at row " + std::to_string(data_row) +
                                 ", column " + names[c]);
            cells.push_back(v);
        }
    }
    FeatureTable t;
    t.rows = std::move(rows);
    t.column_names = std::move(names);
    t.X = Matrix(t.rows.size(), m);
    t.X.data() = std::move(cells);
    return t;
}

void write_table_csv(const FeatureTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "id,speaker,session,label";
    for (const auto& nm : table.column_names) out << ',' << nm;
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < table.n(); ++i) {
        const auto& u = table.rows[i];
        out << u.id << ',' << u.speaker_id << ',' << u.session_id << ',' << u.label;
        for (std::size_t c = 0; c < table.m(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", table.X(i, c));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

namespace {

uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw ParseError("truncated WAV file");
    return b[0] | (b[1] << 8) | (b[2] << 16) | (uint32_t{b[3]} << 24);
}

uint16_t read_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    if (!in) throw ParseError("truncated WAV file");
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

}  // namespace

AudioClip load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open WAV file: " + path);
    char tag[4];
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "RIFF", 4) != 0) throw ParseError(path + ": not a RIFF file");
    read_u32(in);  // riff size
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "WAVE", 4) != 0) throw ParseError(path + ": not a WAVE file");

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t sample_rate = 0;
    bool have_fmt = false;
    std::vector<char> data;
    bool have_data = false;
    while (in.read(tag, 4)) {
        const uint32_t size = read_u32(in);
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            format = read_u16(in);
            channels = read_u16(in);
            sample_rate = read_u32(in);
            read_u32(in);  // byte rate
            read_u16(in);  // block align
            bits = read_u16(in);
            if (size > 16) in.ignore(size - 16);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            data.resize(size);
            in.read(data.data(), size);
            if (static_cast<uint32_t>(in.gcount()) != size)
                throw ParseError(path + ": truncated data chunk");
            have_data = true;
        } else {
            in.ignore(size + (size & 1));
        }
    }
    if (!have_fmt) throw ParseError(path + ": missing fmt chunk");
    if (!have_data) throw ParseError(path + ": missing data chunk");
    if (format != 1 && format != 3)
        throw ParseError(path + ": unsupported encoding (PCM and IEEE float only)");
    if (format == 1 && bits != 16)
        throw ParseError(path + ": unsupported PCM bit depth " + std::to_string(bits));
    if (format == 3 && bits != 32)
        throw ParseError(path + ": unsupported float bit depth " + std::to_string(bits));
    if (channels == 0 || sample_rate == 0) throw ParseError(path + ": invalid fmt chunk");
    if (data.empty()) throw ParseError(path + ": zero-length data chunk");

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t frame_bytes = bytes_per_sample * channels;
    if (data.size() % frame_bytes != 0) throw ParseError(path + ": truncated sample frame");
    const std::size_t frames = data.size() / frame_bytes;

    AudioClip clip;
    clip.sample_rate = static_cast<int>(sample_rate);
    clip.samples.resize(frames);
    for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::size_t ch = 0; ch < channels; ++ch) {
            const char* p = data.data() + f * frame_bytes + ch * bytes_per_sample;
            if (format == 1) {
                int16_t s;
                std::memcpy(&s, p, 2);
                acc += static_cast<double>(s) / 32768.0;
            } else {
                float s;
                std::memcpy(&s, p, 4);
                acc += static_cast<double>(s);
            }
        }
        clip.samples[f] = acc / channels;
    }
    return clip;
}

FeatureTable subset_rows(const FeatureTable& table, const std::vector<int>& indices) {
    FeatureTable out;
    out.column_names = table.column_names;
    out.X = Matrix(indices.size(), table.m());
    out.rows.reserve(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto i = static_cast<std::size_t>(indices[r]);
        out.rows.push_back(table.rows[i]);
        for (std::size_t c = 0; c < table.m(); ++c) out.X(r, c) = table.X(i, c);
    }
    return out;
}

FeatureTable with_features(const FeatureTable& table, Matrix x, std::vector<std::string> names) {
    if (x.rows() != table.n()) throw UserError("with_features: row count mismatch");
    FeatureTable out;
    out.rows = table.rows;
    if (names.empty())
        for (std::size_t c = 0; c < x.cols(); ++c) names.push_back("dim" + std::to_string(c));
    if (names.size() != x.cols()) throw UserError("with_features: column name count mismatch");
    out.column_names = std::move(names);
    out.X = std::move(x);
    return out;
}

FeatureTable fuse_tables(const FeatureTable& a, const FeatureTable& b) {
    if (a.n() != b.n()) throw UserError("fuse: tables have different row counts");
    std::unordered_map<std::string, int> b_index;
    for (std::size_t i = 0; i < b.n(); ++i) b_index[b.rows[i].id] = static_cast<int>(i);
    FeatureTable out;
    out.rows = a.rows;
    out.column_names = a.column_names;
    out.column_names.insert(out.column_names.end(), b.column_names.begin(),
                            b.column_names.end());
    out.X = Matrix(a.n(), a.m() + b.m());
    for (std::size_t i = 0; i < a.n(); ++i) {
        const auto it = b_index.find(a.rows[i].id);
        if (it == b_index.end())
            throw UserError("fuse: id '" + a.rows[i].id + "' missing from second table");
        for (std::size_t c = 0; c < a.m(); ++c) out.X(i, c) = a.X(i, c);
        const auto bi = static_cast<std::size_t>(it->second);
        for (std::size_t c = 0; c < b.m(); ++c) out.X(i, a.m() + c) = b.X(bi, c);
    }
    return out;
}

}  // namespace ser
