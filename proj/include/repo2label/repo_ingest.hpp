#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace repo2label {

struct RepoSource {
    enum class Kind { LocalPath, RemoteRepo };

    Kind kind = Kind::LocalPath;
    std::string locator; // filesystem path, or "owner/name[@ref]"

    static RepoSource local(std::string path);
    static RepoSource remote(std::string coordinate);

    /// Remote coordinate pieces; valid only for RemoteRepo.
    std::string owner() const;
    std::string name() const;
    std::optional<std::string> ref() const;
};

struct RawFile {
    std::string path; // repo-relative, forward slashes
    std::string bytes;
};

/// Raw file tree plus the resolved commit id (remote sources only).
struct RepoTree {
    std::vector<RawFile> files;
    std::optional<std::string> commit;
};

enum class FileKind {
    Code,
    Doc,
    Excluded,
};

struct FileRecord {
    std::string path;
    std::string content; // lossy-decoded UTF-8
    FileKind kind = FileKind::Code;
    std::uint64_t size_bytes = 0;
};

struct FilterPolicy {
    std::set<std::string> excluded_extensions;
    std::set<std::string> doc_extensions;
    /// Tabular-data extensions: excluded above dataset_max_bytes, Doc below.
    std::set<std::string> dataset_extensions;
    std::uint64_t max_file_bytes = 1 << 20;      // 1 MiB
    std::uint64_t dataset_max_bytes = 256 << 10; // 256 KiB
    bool binary_sniff = true;

    static FilterPolicy defaults();
};

struct FetchOptions {
    /// REST API base URL for remote sources.
    std::string api_base_url = "https://api.github.com";
    std::size_t parallelism = 4;
    /// Connect/read timeout seconds for remote requests.
    int timeout_seconds = 30;
};

/// Enumerate every regular file of the source: a local directory, a local
/// tar/tar.gz/zip archive, or a remote repository via its hosting REST API.
/// Symlinks and submodules are skipped; paths are repo-relative with forward
/// slashes. Remote fetches resolve the ref to a commit id.
RepoTree fetch_repository(const RepoSource& source,
                          const std::optional<std::string>& auth_token = std::nullopt,
                          const FetchOptions& options = {});

/// Classify a file by path, size and content. Total function.
FileKind classify_file(std::string_view path, std::string_view bytes, const FilterPolicy& policy);

/// Keep Code/Doc files only, lossy-decode content, order by path.
std::vector<FileRecord> filter_files(const RepoTree& tree, const FilterPolicy& policy);

} // namespace repo2label
