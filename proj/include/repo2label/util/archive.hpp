#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace repo2label::archive {

struct Entry {
    std::string path;
    std::string bytes;
};

bool looks_like_gzip(std::string_view bytes);
bool looks_like_zip(std::string_view bytes);

/// zlib-based gzip decompression of a whole buffer.
std::string gunzip(std::string_view bytes);

/// Read a (possibly pax/ustar) tar archive. Returns regular files only;
/// directories, symlinks and other entry types are skipped. Paths are
/// normalized: leading "./" stripped, backslashes converted, entries with
/// absolute paths or ".." components rejected.
std::vector<Entry> read_tar(std::string_view bytes);

/// Read a zip archive (stored and deflate entries).
std::vector<Entry> read_zip(std::string_view bytes);

/// Dispatch on magic bytes: zip, gzip(tar) or raw tar.
std::vector<Entry> read_archive(std::string_view bytes);

} // namespace repo2label::archive
