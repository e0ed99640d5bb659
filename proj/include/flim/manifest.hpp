#pragma once

// Run manifests: a JSON record of everything needed to reproduce a CLI run
// bit-for-bit — tool version, subcommand, full parameter set, RNG algorithm
// names, and FNV-1a digests of every input and output file.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "flim/field_io.hpp"
#include "flim/version.hpp"

namespace flim {

using Json = nlohmann::ordered_json;

class RunManifest {
public:
    explicit RunManifest(const std::string& subcommand) {
        doc_["tool"] = "flimdeconv";
        doc_["version"] = version_string;
        doc_["subcommand"] = subcommand;
        doc_["rng"] = Json{
            {"uniform", "mt19937_64"},
            {"seed_derivation", "splitmix64(base + counter * 0x9E3779B97F4A7C15)"},
            {"gaussian", "box-muller"},
            {"poisson", "knuth-product (mean < 10), ptrs-hoermann (mean >= 10)"},
        };
        doc_["parameters"] = Json::object();
        doc_["inputs"] = Json::array();
        doc_["outputs"] = Json::array();
    }

    void set_parameters(Json params) { doc_["parameters"] = std::move(params); }

    // Inputs keep the path as given; outputs are recorded by file name since
    // they sit next to the manifest.
    void add_input(const std::filesystem::path& path) {
        doc_["inputs"].push_back(Json{
            {"path", path.string()},
            {"fnv1a64", digest_hex(file_digest(path))},
        });
    }

    void add_output(const std::filesystem::path& path) {
        doc_["outputs"].push_back(Json{
            {"file", path.filename().string()},
            {"fnv1a64", digest_hex(file_digest(path))},
        });
    }

    const Json& doc() const { return doc_; }
    Json& doc() { return doc_; }

    void write(const std::filesystem::path& path) const {
        atomic_write_file(path, doc_.dump(2) + "\n");
    }

private:
    Json doc_;
};

inline Json read_manifest(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return Json::parse(bytes.begin(), bytes.end());
}

} // namespace flim
