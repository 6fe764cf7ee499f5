// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "birdbench/level.hpp"

#include <filesystem>
#include <string>

namespace test_support {

inline std::filesystem::path source_dir() { return BIRDBENCH_SOURCE_DIR; }
inline std::filesystem::path levels_dir() { return source_dir() / "levels"; }
inline std::filesystem::path fixture(const std::string &name) { return source_dir() / "tests" / "fixtures" / name; }

inline birdbench::level::Level load_fixture(const std::string &name)
{
    return birdbench::level::load_level_file(fixture(name + ".json"));
}

inline birdbench::level::Level load_pack_level(const std::string &id)
{
    return birdbench::level::load_level_file(levels_dir() / (id + ".json"));
}

} // namespace test_support
