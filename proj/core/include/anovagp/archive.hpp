#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "anovagp/emulator.hpp"

namespace anovagp {

/// Emulator archives are CBOR documents with a "schema" tag and a "version".
/// Doubles are stored as IEEE-754 binary64, so loading reproduces every value
/// bit for bit. GP factorizations are recomputed on load from the stored
/// inputs, targets and log-hyperparameters.
inline constexpr int kArchiveVersion = 1;
inline constexpr const char* kAnovaGpSchema = "anovagp.anova-gp-emulator";
inline constexpr const char* kSgpSchema = "anovagp.sgp-emulator";

enum class EmulatorKind { AnovaGp, Sgp };

std::vector<std::uint8_t> encode(const AnovaGpEmulator& emulator);
std::vector<std::uint8_t> encode(const SgpEmulator& emulator);
AnovaGpEmulator decode_anova_gp(const std::vector<std::uint8_t>& bytes);
SgpEmulator decode_sgp(const std::vector<std::uint8_t>& bytes);
EmulatorKind archive_kind(const std::vector<std::uint8_t>& bytes);

void save_emulator(const AnovaGpEmulator& emulator, const std::filesystem::path& path);
void save_emulator(const SgpEmulator& emulator, const std::filesystem::path& path);
std::vector<std::uint8_t> read_archive(const std::filesystem::path& path);

}  // namespace anovagp
