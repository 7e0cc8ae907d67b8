#include "repo2label/repo_ingest.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "repo2label/errors.hpp"
#include "repo2label/util/archive.hpp"
#include "repo2label/util/concurrency.hpp"
#include "repo2label/util/hash.hpp"
#include "repo2label/util/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace repo2label {

// ---- RepoSource --------------------------------------------------------

RepoSource RepoSource::local(std::string path) {
    return RepoSource{Kind::LocalPath, std::move(path)};
}

RepoSource RepoSource::remote(std::string coordinate) {
    RepoSource s{Kind::RemoteRepo, std::move(coordinate)};
    if (s.owner().empty() || s.name().empty()) {
        throw ConfigError("ingest: remote coordinate must be owner/name[@ref]: " + s.locator);
    }
    return s;
}

std::string RepoSource::owner() const {
    const auto slash = locator.find('/');
    if (slash == std::string::npos) return {};
    return locator.substr(0, slash);
}

std::string RepoSource::name() const {
    const auto slash = locator.find('/');
    if (slash == std::string::npos) return {};
    auto rest = locator.substr(slash + 1);
    const auto at = rest.find('@');
    if (at != std::string::npos) rest = rest.substr(0, at);
    return rest;
}

std::optional<std::string> RepoSource::ref() const {
    const auto at = locator.find('@');
    if (at == std::string::npos) return std::nullopt;
    return locator.substr(at + 1);
}

// ---- FilterPolicy ------------------------------------------------------

FilterPolicy FilterPolicy::defaults() {
    FilterPolicy p;
    p.excluded_extensions = {
        // images
        ".png", ".jpg", ".jpeg", ".gif", ".svg", ".ico", ".bmp", ".webp",
        // media
        ".mp3", ".mp4", ".wav", ".mov",
        // archives
        ".zip", ".tar", ".gz", ".7z",
        // model weights / embeddings
        ".bin", ".pt", ".pth", ".ckpt", ".onnx", ".safetensors", ".npz", ".npy", ".pkl", ".h5",
        // fonts
        ".ttf", ".otf", ".woff", ".woff2",
        // lockfiles
        ".lock",
    };
    p.doc_extensions = {".md", ".rst", ".txt"};
    p.dataset_extensions = {".csv", ".tsv", ".jsonl", ".parquet"};
    return p;
}

// ---- classification ----------------------------------------------------

namespace {

std::string extension_of(std::string_view path) {
    const auto slash = path.find_last_of('/');
    const std::string_view base = slash == std::string_view::npos ? path : path.substr(slash + 1);
    const auto dot = base.find_last_of('.');
    if (dot == std::string_view::npos || dot == 0) return {};
    return text::to_lower_ascii(base.substr(dot));
}

std::string_view basename_of(std::string_view path) {
    const auto slash = path.find_last_of('/');
    return slash == std::string_view::npos ? path : path.substr(slash + 1);
}

bool is_minified_bundle(std::string_view path) {
    const std::string base = text::to_lower_ascii(basename_of(path));
    return base.ends_with(".min.js") || base.ends_with(".min.css");
}

// Extensionless project docs.
bool is_doc_filename(std::string_view path) {
    const std::string stem = [&] {
        std::string base = text::to_lower_ascii(basename_of(path));
        const auto dot = base.find('.');
        return dot == std::string::npos ? base : base.substr(0, dot);
    }();
    return stem == "readme" || stem == "license" || stem == "licence" || stem == "notice" ||
           stem == "changelog" || stem == "contributing" || stem == "authors";
}

bool has_dotgit_component(const fs::path& p) {
    for (const auto& part : p) {
        if (part == ".git") return true;
    }
    return false;
}

std::string read_file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw SourceNotFound("ingest: cannot read file: " + p.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

RepoTree fetch_local(const fs::path& root) {
    RepoTree tree;
    std::error_code ec;
    const auto status = fs::symlink_status(root, ec);
    if (ec || !fs::exists(status)) {
        throw SourceNotFound("ingest: repository source not found: " + root.string());
    }

    if (fs::is_regular_file(status)) {
        const std::string bytes = read_file_bytes(root);
        for (auto& entry : archive::read_archive(bytes)) {
            tree.files.push_back(RawFile{std::move(entry.path), std::move(entry.bytes)});
        }
        return tree;
    }
    if (!fs::is_directory(status)) {
        throw SourceNotFound("ingest: source is neither a directory nor an archive: " +
                             root.string());
    }

    for (fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied),
         end;
         it != end; ++it) {
        const fs::directory_entry& entry = *it;
        if (entry.is_symlink()) {
            if (entry.is_directory()) it.disable_recursion_pending();
            continue;
        }
        if (entry.is_directory()) {
            if (entry.path().filename() == ".git") it.disable_recursion_pending();
            continue;
        }
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), root);
        if (has_dotgit_component(rel)) continue;
        tree.files.push_back(RawFile{rel.generic_string(), read_file_bytes(entry.path())});
    }
    return tree;
}

// ---- remote fetch (code-hosting REST API) ------------------------------

struct RemoteClient {
    RemoteClient(const std::string& base_url, const std::optional<std::string>& token,
                 int timeout_seconds)
        : base_url(base_url), timeout_seconds(timeout_seconds) {
        headers = {{"Accept", "application/vnd.github+json"}, {"User-Agent", "repo2label"}};
        if (token && !token->empty()) {
            headers.emplace("Authorization", "Bearer " + *token);
        }
    }

    // A fresh connection per request; httplib clients must not be shared
    // across the blob-fetch worker threads.
    json get_json(const std::string& path) {
        httplib::Client client(base_url);
        client.set_connection_timeout(timeout_seconds, 0);
        client.set_read_timeout(timeout_seconds, 0);
        client.set_follow_location(true);
        auto res = client.Get(path, headers);
        if (!res) {
            throw NetworkError("ingest: network error on " + path + ": " +
                               httplib::to_string(res.error()));
        }
        check_status(*res, path);
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            throw NetworkError("ingest: invalid JSON from " + path + ": " + e.what());
        }
    }

    static void check_status(const httplib::Response& res, const std::string& path) {
        if (res.status >= 200 && res.status < 300) return;
        if (res.status == 404) {
            throw SourceNotFound("ingest: remote path not found: " + path);
        }
        const bool has_retry_after = res.has_header("Retry-After");
        const bool rate_exhausted = res.get_header_value("X-RateLimit-Remaining") == "0";
        if (res.status == 429 || (res.status == 403 && (has_retry_after || rate_exhausted))) {
            std::optional<int> retry_after;
            if (has_retry_after) {
                try {
                    retry_after = std::stoi(res.get_header_value("Retry-After"));
                } catch (...) {
                }
            }
            throw RateLimited("ingest: rate limited by remote API on " + path +
                                  (retry_after ? " (retry after " +
                                                     std::to_string(*retry_after) + "s)"
                                               : ""),
                              retry_after);
        }
        if (res.status == 401 || res.status == 403) {
            throw AuthRequired(
                "ingest: remote API rejected the request (HTTP " + std::to_string(res.status) +
                "); set REPO2LABEL_VCS_TOKEN to a valid access token for " + path);
        }
        throw NetworkError("ingest: unexpected HTTP " + std::to_string(res.status) + " from " +
                           path);
    }

    std::string base_url;
    int timeout_seconds;
    httplib::Headers headers;
};

RepoTree fetch_remote(const RepoSource& source, const std::optional<std::string>& token,
                      const FetchOptions& options) {
    RemoteClient api(options.api_base_url, token, options.timeout_seconds);
    const std::string repo_path = "/repos/" + source.owner() + "/" + source.name();

    std::string ref;
    if (auto explicit_ref = source.ref()) {
        ref = *explicit_ref;
    } else {
        const json repo = api.get_json(repo_path);
        ref = repo.value("default_branch", "main");
    }

    const json commit = api.get_json(repo_path + "/commits/" + ref);
    const std::string sha = commit.value("sha", ref);

    const json tree_doc = api.get_json(repo_path + "/git/trees/" + sha + "?recursive=1");

    struct BlobRef {
        std::string path;
        std::string sha;
    };
    std::vector<BlobRef> blobs;
    for (const auto& node : tree_doc.value("tree", json::array())) {
        if (node.value("type", "") != "blob") continue; // trees, submodule commits
        if (node.value("mode", "") == "120000") continue; // symlink
        blobs.push_back(BlobRef{node.value("path", ""), node.value("sha", "")});
    }

    auto outcomes = concurrency::parallel_map(
        options.parallelism, blobs.size(), [&](std::size_t i) -> RawFile {
            const json blob = api.get_json(repo_path + "/git/blobs/" + blobs[i].sha);
            std::string content = blob.value("content", "");
            if (blob.value("encoding", "base64") == "base64") {
                content = hash::base64_decode(content);
            }
            return RawFile{blobs[i].path, std::move(content)};
        });

    RepoTree tree;
    tree.commit = sha;
    for (auto& outcome : outcomes) {
        if (!outcome.ok()) throw NetworkError(outcome.error);
        tree.files.push_back(std::move(*outcome.value));
    }
    return tree;
}

} // namespace

RepoTree fetch_repository(const RepoSource& source, const std::optional<std::string>& auth_token,
                          const FetchOptions& options) {
    if (source.kind == RepoSource::Kind::LocalPath) {
        return fetch_local(fs::path(source.locator));
    }
    return fetch_remote(source, auth_token, options);
}

FileKind classify_file(std::string_view path, std::string_view bytes,
                       const FilterPolicy& policy) {
    const std::string ext = extension_of(path);

    if (policy.excluded_extensions.count(ext) || is_minified_bundle(path)) {
        return FileKind::Excluded;
    }
    if (policy.dataset_extensions.count(ext)) {
        return bytes.size() > policy.dataset_max_bytes ? FileKind::Excluded : FileKind::Doc;
    }
    if (bytes.size() > policy.max_file_bytes) return FileKind::Excluded;
    if (policy.binary_sniff && text::looks_binary(bytes)) return FileKind::Excluded;
    if (policy.doc_extensions.count(ext) || is_doc_filename(path)) return FileKind::Doc;
    return FileKind::Code;
}

std::vector<FileRecord> filter_files(const RepoTree& tree, const FilterPolicy& policy) {
    std::vector<FileRecord> records;
    for (const RawFile& file : tree.files) {
        const FileKind kind = classify_file(file.path, file.bytes, policy);
        if (kind == FileKind::Excluded) continue;
        FileRecord rec;
        rec.path = file.path;
        rec.content = text::lossy_utf8(file.bytes);
        rec.kind = kind;
        rec.size_bytes = file.bytes.size();
        records.push_back(std::move(rec));
    }
    std::sort(records.begin(), records.end(),
              [](const FileRecord& a, const FileRecord& b) { return a.path < b.path; });
    return records;
}

} // namespace repo2label
