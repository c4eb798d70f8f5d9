#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "evdfa/events.hpp"

namespace evdfa {

enum class FileFormat { csv, evs_binary };

struct LoadOptions {
    SortMode sort_mode = SortMode::stable_sort;
    // CSV carries no geometry; by default it is inferred as the tight
    // bounding box (max coordinate + 1). Set this to validate against a
    // known sensor size instead. Ignored for evs-binary.
    std::optional<SensorGeometry> geometry;
};

/// Reads a stream in the given format. Ground-truth labels, when present
/// in the file, are preserved alongside the events.
LabeledStream load_stream(std::istream& in, FileFormat format,
                          const LoadOptions& options = {});

/// Writes a stream; load_stream inverts it field-for-field.
void save_stream(std::ostream& out, const LabeledStream& s, FileFormat format);

/// ".csv" -> csv, anything else -> evs-binary.
FileFormat format_from_path(const std::filesystem::path& path);

LabeledStream load_stream_file(const std::filesystem::path& path,
                               const LoadOptions& options = {});
void save_stream_file(const std::filesystem::path& path, const LabeledStream& s);

} // namespace evdfa
