#include "citerank/jsonl.hpp"

#include "citerank/error.hpp"

namespace citerank {

JsonlReader::JsonlReader(const std::filesystem::path& path) : path_(path), in_(path) {
    if (!in_) throw InputError("cannot open input " + path.string());
}

bool JsonlReader::next(nlohmann::json& record) {
    std::string text;
    while (std::getline(in_, text)) {
        ++line_;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            record = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw InputError(path_.string() + ":" + std::to_string(line_) + ": " + e.what());
        }
        if (!record.is_object()) throw InputError(path_.string() + ":" + std::to_string(line_) + ": expected an object");
        return true;
    }
    if (in_.bad()) throw InputError("read error on " + path_.string());
    return false;
}

std::filesystem::path StagedFile::partial_name(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".partial");
}

StagedFile::StagedFile(std::filesystem::path path) : path_(std::move(path)), out_(partial_name(path_), std::ios::binary) {
    if (!out_) throw InputError("cannot create output " + partial_name(path_).string());
}

StagedFile::~StagedFile() {
    if (!committed_) out_.flush();
}

void StagedFile::write_line(const nlohmann::json& record) {
    out_ << record.dump() << '\n';
}

void StagedFile::write(const std::string& text) { out_ << text; }

void StagedFile::commit() {
    out_.flush();
    if (!out_) throw InputError("write failed for " + partial_name(path_).string());
    out_.close();
    std::filesystem::rename(partial_name(path_), path_);
    committed_ = true;
}

}  // namespace citerank
