#include "evdfa/codec.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace evdfa {

namespace {

constexpr char kMagic[4] = {'E', 'V', 'S', '1'};
constexpr std::uint8_t kFlagLabels = 0x01;

// --- strict integer field parsing (digits only; '+'/'-' allowed where noted)

bool parse_u64_digits(const std::string& field, std::uint64_t& out) {
    if (field.empty()) return false;
    std::uint64_t v = 0;
    for (char c : field) {
        if (c < '0' || c > '9') return false;
        if (v > (std::numeric_limits<std::uint64_t>::max() - (c - '0')) / 10)
            return false;
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    out = v;
    return true;
}

bool parse_polarity(const std::string& field, std::int8_t& out) {
    if (field == "1" || field == "+1") {
        out = 1;
        return true;
    }
    if (field == "-1") {
        out = -1;
        return true;
    }
    return false;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

LabeledStream load_csv(std::istream& in, const LoadOptions& options) {
    std::string line;
    if (!read_line(in, line))
        throw DataError("csv: missing header line");

    bool labeled = false;
    if (line == "t,x,y,p") {
        labeled = false;
    } else if (line == "t,x,y,p,label") {
        labeled = true;
    } else {
        throw MalformedRecordError("csv: unrecognized header \"" + line + "\"");
    }
    const std::size_t expected_fields = labeled ? 5 : 4;

    LabeledStream out;
    std::size_t lineno = 1;
    std::uint16_t max_x = 0, max_y = 0;
    while (read_line(in, line)) {
        ++lineno;
        if (line.empty()) continue; // tolerate a trailing blank line
        const auto fields = split_csv(line);
        if (fields.size() != expected_fields)
            throw MalformedRecordError("csv line " + std::to_string(lineno) +
                                       ": expected " +
                                       std::to_string(expected_fields) +
                                       " fields, got " +
                                       std::to_string(fields.size()));
        std::uint64_t t, x, y;
        if (!parse_u64_digits(fields[0], t))
            throw MalformedRecordError("csv line " + std::to_string(lineno) +
                                       ": bad timestamp \"" + fields[0] + "\"");
        if (t > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
            throw MalformedRecordError("csv line " + std::to_string(lineno) +
                                       ": timestamp out of range");
        if (!parse_u64_digits(fields[1], x) || x > 0xFFFF)
            throw MalformedRecordError("csv line " + std::to_string(lineno) +
                                       ": bad x \"" + fields[1] + "\"");
        if (!parse_u64_digits(fields[2], y) || y > 0xFFFF)
            throw MalformedRecordError("csv line " + std::to_string(lineno) +
                                       ": bad y \"" + fields[2] + "\"");
        std::int8_t p;
        if (!parse_polarity(fields[3], p))
            throw MalformedPolarityError("csv line " + std::to_string(lineno) +
                                         ": polarity must be 1 or -1, got \"" +
                                         fields[3] + "\"");
        if (labeled) {
            std::uint64_t lab;
            if (!parse_u64_digits(fields[4], lab) || lab > 2)
                throw MalformedRecordError("csv line " + std::to_string(lineno) +
                                           ": label must be 0, 1 or 2");
            out.labels.push_back(static_cast<Label>(lab));
        }
        out.stream.events.push_back(Event{static_cast<std::int64_t>(t),
                                          static_cast<std::uint16_t>(x),
                                          static_cast<std::uint16_t>(y), p});
        max_x = std::max(max_x, static_cast<std::uint16_t>(x));
        max_y = std::max(max_y, static_cast<std::uint16_t>(y));
    }

    if (options.geometry) {
        out.stream.geometry = *options.geometry;
    } else if (out.stream.events.empty()) {
        out.stream.geometry = SensorGeometry{1, 1};
    } else {
        out.stream.geometry = SensorGeometry{
            static_cast<std::uint16_t>(max_x + 1),
            static_cast<std::uint16_t>(max_y + 1)};
    }
    return out;
}

void save_csv(std::ostream& out, const LabeledStream& s) {
    const bool labeled = s.has_labels();
    out << (labeled ? "t,x,y,p,label\n" : "t,x,y,p\n");
    for (std::size_t i = 0; i < s.stream.events.size(); ++i) {
        const Event& e = s.stream.events[i];
        out << e.t << ',' << e.x << ',' << e.y << ',' << static_cast<int>(e.p);
        if (labeled) out << ',' << static_cast<unsigned>(s.labels[i]);
        out << '\n';
    }
}

// --- explicit little-endian packing

void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void put_u16(std::ostream& out, std::uint16_t v) {
    const std::array<unsigned char, 2> b = {
        static_cast<unsigned char>(v & 0xFF),
        static_cast<unsigned char>(v >> 8)};
    put_bytes(out, b.data(), b.size());
}

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<unsigned char, 8> b;
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    put_bytes(out, b.data(), b.size());
}

bool get_bytes(std::istream& in, void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    return static_cast<std::size_t>(in.gcount()) == n;
}

bool get_u16(std::istream& in, std::uint16_t& v) {
    unsigned char b[2];
    if (!get_bytes(in, b, 2)) return false;
    v = static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    return true;
}

bool get_u64(std::istream& in, std::uint64_t& v) {
    unsigned char b[8];
    if (!get_bytes(in, b, 8)) return false;
    v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return true;
}

LabeledStream load_evs(std::istream& in) {
    char magic[4];
    if (!get_bytes(in, magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("evs: bad magic bytes");

    SensorGeometry geometry;
    std::uint64_t count;
    std::uint8_t flags;
    if (!get_u16(in, geometry.width) || !get_u16(in, geometry.height) ||
        !get_u64(in, count) || !get_bytes(in, &flags, 1))
        throw DataError("evs: truncated header");
    validate_geometry(geometry);
    const bool labeled = (flags & kFlagLabels) != 0;

    LabeledStream out;
    out.stream.geometry = geometry;
    out.stream.events.reserve(static_cast<std::size_t>(count));
    if (labeled) out.labels.reserve(static_cast<std::size_t>(count));
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t t;
        std::uint16_t x, y;
        std::int8_t p;
        if (!get_u64(in, t) || !get_u16(in, x) || !get_u16(in, y) ||
            !get_bytes(in, &p, 1))
            throw DataError("evs: truncated at record " + std::to_string(i));
        if (t > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
            throw DataError("evs: timestamp out of range at record " +
                            std::to_string(i));
        if (p != 1 && p != -1)
            throw MalformedPolarityError("evs: bad polarity at record " +
                                         std::to_string(i));
        if (!geometry.contains(x, y))
            throw OutOfBoundsError("evs: pixel outside geometry at record " +
                                   std::to_string(i));
        if (labeled) {
            std::uint8_t lab;
            if (!get_bytes(in, &lab, 1))
                throw DataError("evs: truncated at record " + std::to_string(i));
            if (lab > 2)
                throw MalformedRecordError("evs: bad label at record " +
                                           std::to_string(i));
            out.labels.push_back(static_cast<Label>(lab));
        }
        out.stream.events.push_back(
            Event{static_cast<std::int64_t>(t), x, y, p});
    }
    return out;
}

void save_evs(std::ostream& out, const LabeledStream& s) {
    const bool labeled = s.has_labels();
    put_bytes(out, kMagic, 4);
    put_u16(out, s.stream.geometry.width);
    put_u16(out, s.stream.geometry.height);
    put_u64(out, static_cast<std::uint64_t>(s.stream.events.size()));
    const std::uint8_t flags = labeled ? kFlagLabels : 0;
    put_bytes(out, &flags, 1);
    for (std::size_t i = 0; i < s.stream.events.size(); ++i) {
        const Event& e = s.stream.events[i];
        put_u64(out, static_cast<std::uint64_t>(e.t));
        put_u16(out, e.x);
        put_u16(out, e.y);
        put_bytes(out, &e.p, 1);
        if (labeled) {
            const std::uint8_t lab = static_cast<std::uint8_t>(s.labels[i]);
            put_bytes(out, &lab, 1);
        }
    }
}

} // namespace

LabeledStream load_stream(std::istream& in, FileFormat format,
                          const LoadOptions& options) {
    LabeledStream raw = (format == FileFormat::csv) ? load_csv(in, options)
                                                    : load_evs(in);
    if (raw.has_labels() && raw.labels.size() != raw.stream.size())
        throw LengthMismatchError("label count does not match event count");
    LabeledStream sorted = validate_sort(std::move(raw), options.sort_mode);
    validate_stream(sorted.stream);
    return sorted;
}

void save_stream(std::ostream& out, const LabeledStream& s, FileFormat format) {
    if (s.has_labels() && s.labels.size() != s.stream.size())
        throw LengthMismatchError("label count does not match event count");
    if (format == FileFormat::csv)
        save_csv(out, s);
    else
        save_evs(out, s);
    if (!out) throw DataError("write failure");
}

FileFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? FileFormat::csv : FileFormat::evs_binary;
}

LabeledStream load_stream_file(const std::filesystem::path& path,
                               const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return load_stream(in, format_from_path(path), options);
}

void save_stream_file(const std::filesystem::path& path, const LabeledStream& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    save_stream(out, s, format_from_path(path));
}

} // namespace evdfa
