#include "repo2label/util/archive.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <stdexcept>

#include "repo2label/util/text.hpp"

namespace repo2label::archive {

namespace {

std::string normalize_path(std::string path) {
    for (char& c : path) {
        if (c == '\\') c = '/';
    }
    while (path.rfind("./", 0) == 0) path.erase(0, 2);
    if (!path.empty() && path.front() == '/') {
        throw std::runtime_error("archive: absolute entry path: " + path);
    }
    for (const auto& part : text::split(path, "/")) {
        if (part == "..") throw std::runtime_error("archive: '..' in entry path: " + path);
    }
    return path;
}

std::uint64_t parse_octal(std::string_view field) {
    std::uint64_t v = 0;
    for (char c : field) {
        if (c == '\0' || c == ' ') break;
        if (c < '0' || c > '7') throw std::runtime_error("tar: bad octal field");
        v = v * 8 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
}

std::string inflate_raw(std::string_view in, std::size_t expected_out) {
    std::string out;
    out.resize(expected_out);
    z_stream zs{};
    // -MAX_WBITS: raw deflate stream (zip entries carry no zlib header).
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw std::runtime_error("zip: inflateInit failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END && !(rc == Z_OK && zs.avail_out == 0)) {
        throw std::runtime_error("zip: inflate failed");
    }
    out.resize(out.size() - zs.avail_out);
    return out;
}

std::uint32_t le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

} // namespace

bool looks_like_gzip(std::string_view bytes) {
    return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1F &&
           static_cast<unsigned char>(bytes[1]) == 0x8B;
}

bool looks_like_zip(std::string_view bytes) {
    return bytes.size() >= 4 && bytes.substr(0, 2) == "PK";
}

std::string gunzip(std::string_view bytes) {
    std::string out;
    z_stream zs{};
    // 16+MAX_WBITS: gzip wrapper.
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) {
        throw std::runtime_error("gzip: inflateInit failed");
    }
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
    zs.avail_in = static_cast<uInt>(bytes.size());
    char buf[1 << 16];
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw std::runtime_error("gzip: corrupt stream");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (rc != Z_STREAM_END && zs.avail_in > 0);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw std::runtime_error("gzip: truncated stream");
    return out;
}

std::vector<Entry> read_tar(std::string_view bytes) {
    std::vector<Entry> entries;
    std::size_t off = 0;
    std::string pending_longname;

    while (off + 512 <= bytes.size()) {
        const std::string_view header = bytes.substr(off, 512);
        // Two all-zero blocks mark the end; one is enough to stop safely.
        if (header.find_first_not_of('\0') == std::string_view::npos) break;

        std::string name(header.substr(0, 100).data(),
                         strnlen(header.data(), 100));
        const std::uint64_t size = parse_octal(header.substr(124, 12));
        const char typeflag = header[156];
        const std::string_view magic = header.substr(257, 5);

        std::string prefix;
        if (magic == "ustar") {
            prefix.assign(header.substr(345, 155).data(),
                          strnlen(header.data() + 345, 155));
        }

        off += 512;
        const std::size_t data_len = static_cast<std::size_t>(size);
        if (off + data_len > bytes.size()) throw std::runtime_error("tar: truncated archive");
        const std::string_view data = bytes.substr(off, data_len);
        off += (data_len + 511) / 512 * 512;

        if (typeflag == 'L') { // GNU long name: payload is the next entry's path
            pending_longname.assign(data.data(), data.size());
            while (!pending_longname.empty() && pending_longname.back() == '\0') {
                pending_longname.pop_back();
            }
            continue;
        }
        if (typeflag == 'x') { // pax extended header: "<len> key=value\n" records
            std::string_view rest(data.data(), data.size());
            while (!rest.empty()) {
                const std::size_t sp = rest.find(' ');
                if (sp == 0 || sp == std::string_view::npos) break;
                std::size_t len = 0;
                for (char ch : rest.substr(0, sp)) {
                    if (ch < '0' || ch > '9') { len = 0; break; }
                    len = len * 10 + static_cast<std::size_t>(ch - '0');
                }
                if (len <= sp + 1 || len > rest.size()) break;
                std::string_view record = rest.substr(sp + 1, len - sp - 1);
                if (!record.empty() && record.back() == '\n') record.remove_suffix(1);
                const std::size_t eq = record.find('=');
                if (eq != std::string_view::npos && record.substr(0, eq) == "path") {
                    pending_longname.assign(record.substr(eq + 1));
                }
                rest.remove_prefix(len);
            }
            continue;
        }
        if (!pending_longname.empty()) {
            name = pending_longname;
            pending_longname.clear();
        } else if (!prefix.empty()) {
            name = prefix + "/" + name;
        }

        // '0' and '\0' are regular files; everything else (dirs, links,
        // fifos, pax headers) is skipped.
        if (typeflag != '0' && typeflag != '\0') continue;
        if (name.empty() || name.back() == '/') continue;

        entries.push_back(Entry{normalize_path(std::move(name)),
                                std::string(data.data(), data.size())});
    }
    return entries;
}

std::vector<Entry> read_zip(std::string_view bytes) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();

    // Locate the end-of-central-directory record (scan back over the comment).
    if (n < 22) throw std::runtime_error("zip: too small");
    std::size_t eocd = std::string_view::npos;
    const std::size_t scan_limit = n >= 22 + 65535 ? n - 22 - 65535 : 0;
    for (std::size_t i = n - 22; ; --i) {
        if (le32(p + i) == 0x06054b50) {
            eocd = i;
            break;
        }
        if (i == scan_limit) break;
    }
    if (eocd == std::string_view::npos) throw std::runtime_error("zip: no end-of-central-directory");

    const std::uint16_t count = le16(p + eocd + 10);
    std::size_t cd = le32(p + eocd + 16);

    std::vector<Entry> entries;
    for (std::uint16_t i = 0; i < count; ++i) {
        if (cd + 46 > n || le32(p + cd) != 0x02014b50) {
            throw std::runtime_error("zip: bad central directory entry");
        }
        const std::uint16_t method = le16(p + cd + 10);
        const std::uint32_t comp_size = le32(p + cd + 20);
        const std::uint32_t raw_size = le32(p + cd + 24);
        const std::uint16_t name_len = le16(p + cd + 28);
        const std::uint16_t extra_len = le16(p + cd + 30);
        const std::uint16_t comment_len = le16(p + cd + 32);
        const std::uint32_t local_off = le32(p + cd + 42);
        std::string name(bytes.substr(cd + 46, name_len));
        cd += 46u + name_len + extra_len + comment_len;

        if (name.empty() || name.back() == '/') continue; // directory

        if (local_off + 30 > n || le32(p + local_off) != 0x04034b50) {
            throw std::runtime_error("zip: bad local header for " + name);
        }
        const std::uint16_t lname = le16(p + local_off + 26);
        const std::uint16_t lextra = le16(p + local_off + 28);
        const std::size_t data_off = local_off + 30u + lname + lextra;
        if (data_off + comp_size > n) throw std::runtime_error("zip: truncated entry " + name);
        const std::string_view comp = bytes.substr(data_off, comp_size);

        std::string data;
        if (method == 0) {
            data.assign(comp.data(), comp.size());
        } else if (method == 8) {
            data = inflate_raw(comp, raw_size);
        } else {
            throw std::runtime_error("zip: unsupported compression method for " + name);
        }
        entries.push_back(Entry{normalize_path(std::move(name)), std::move(data)});
    }
    return entries;
}

std::vector<Entry> read_archive(std::string_view bytes) {
    if (looks_like_zip(bytes)) return read_zip(bytes);
    if (looks_like_gzip(bytes)) {
        const std::string raw = gunzip(bytes);
        return read_tar(raw);
    }
    return read_tar(bytes);
}

} // namespace repo2label::archive
