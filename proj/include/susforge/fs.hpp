// Copyright 2026 The susforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace susforge {

namespace fs = std::filesystem;

// A directory tree holding one repository state. Paths handed around inside
// the pipeline are always relative to `root` and use '/' separators.
struct Workspace {
  fs::path root;

  fs::path resolve(std::string_view relative) const { return root / relative; }
  bool operator==(const Workspace&) const = default;
};

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view content);

// Relative paths of all regular files under root, sorted, skipping `.git`.
std::vector<std::string> list_files(const fs::path& root);

// Replaces `to` with a copy of `from` (without `.git`).
void copy_tree(const fs::path& from, const fs::path& to);

// SHA-256 over (path, content) pairs of every file, in sorted order.
std::string content_digest(const Workspace& ws);
std::string sha256_hex(std::string_view data);

// Creates a fresh unique directory under `parent` (or the system temp dir).
fs::path make_temp_dir(const std::string& prefix, const fs::path& parent = {});

// Removes the directory on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix, const fs::path& parent = {})
      : path_(make_temp_dir(prefix, parent)) {}
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  TempDir(TempDir&& other) noexcept : path_(std::move(other.path_)) {
    other.path_.clear();
  }

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Exclusive advisory lock on a file (created if missing), held for the
// object's lifetime. Serializes across processes and threads alike.
class FileLock {
 public:
  explicit FileLock(const fs::path& path);
  ~FileLock();
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

// Strips one trailing '\r' from each line and splits on '\n'. The final
// element is dropped when the text ends with a newline.
std::vector<std::string> split_lines(std::string_view text);
std::string join_lines(const std::vector<std::string>& lines, bool final_newline = true);

std::string trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);
std::string to_lower(std::string_view s);

}  // namespace susforge
