#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace citerank {

/// Line-at-a-time JSON reader. Blank lines are skipped; a malformed line
/// throws InputError naming the file and line.
class JsonlReader {
public:
    explicit JsonlReader(const std::filesystem::path& path);

    bool next(nlohmann::json& record);
    std::size_t line() const noexcept { return line_; }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::size_t line_ = 0;
};

/// Output written to "<path>.partial" and renamed onto `path` by commit().
/// An uncommitted file is flushed and left in place under the .partial name.
class StagedFile {
public:
    explicit StagedFile(std::filesystem::path path);
    ~StagedFile();

    StagedFile(const StagedFile&) = delete;
    StagedFile& operator=(const StagedFile&) = delete;

    void write_line(const nlohmann::json& record);
    void write(const std::string& text);
    void commit();

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path partial_path() const { return partial_name(path_); }
    static std::filesystem::path partial_name(const std::filesystem::path& path);

private:
    std::filesystem::path path_;
    std::ofstream out_;
    bool committed_ = false;
};

}  // namespace citerank
