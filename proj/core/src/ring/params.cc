// Copyright 2026 The VFI Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vfi/ring/params.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "vfi/common/bytes.h"
#include "vfi/common/status.h"
#include "vfi/ring/modarith.h"

namespace vfi::ring {
namespace {

using nlohmann::json;

absl::Status CheckModulus(uint64_t q, size_t n, absl::string_view what) {
  if (q >= (uint64_t{1} << 62)) {
    return StructuralError(absl::StrCat(what, " ", q, " exceeds 62 bits"));
  }
  if (!IsPrime(q)) {
    return StructuralError(absl::StrCat(what, " ", q, " is not prime"));
  }
  if ((q - 1) % (2 * n) != 0) {
    return StructuralError(
        absl::StrCat(what, " ", q, " is not 1 mod 2*ringDegree"));
  }
  return absl::OkStatus();
}

Seed SeedFromLabel(absl::string_view label) {
  return Sha256({reinterpret_cast<const uint8_t*>(label.data()),
                 label.size()});
}

CryptoParams MakePreset(std::string name, size_t n,
                        std::vector<uint64_t> moduli, uint64_t special,
                        double log2_scale, double smudge_sigma,
                        std::string security) {
  CryptoParams p;
  p.crs_seed = SeedFromLabel(absl::StrCat("vfi/crs/", name));
  p.name = std::move(name);
  p.ring_degree = n;
  p.moduli = std::move(moduli);
  p.special_moduli = {special};
  p.log2_scale = log2_scale;
  p.ternary_density = 0.5;
  p.gaussian_sigma = 3.2;
  p.smudge_sigma = smudge_sigma;
  p.claimed_security = std::move(security);
  return p;
}

}  // namespace

absl::Status CryptoParams::Validate() const {
  if (ring_degree < 2 || (ring_degree & (ring_degree - 1)) != 0) {
    return StructuralError("ringDegree must be a power of two >= 2");
  }
  if (ring_degree > (size_t{1} << 17)) {
    return StructuralError("ringDegree too large");
  }
  if (moduli.empty()) return StructuralError("modulus chain is empty");
  if (moduli.size() > 32) return StructuralError("modulus chain too long");
  if (special_moduli.size() != 1) {
    return StructuralError("exactly one special modulus is supported");
  }
  std::set<uint64_t> seen;
  for (uint64_t q : moduli) {
    absl::Status s = CheckModulus(q, ring_degree, "modulus");
    if (!s.ok()) return s;
    if (!seen.insert(q).second) {
      return StructuralError(absl::StrCat("modulus ", q, " repeated"));
    }
    if (!(log2_scale < std::log2(static_cast<double>(q)))) {
      return StructuralError(
          absl::StrCat("log2Scale ", log2_scale, " not below log2 of ", q));
    }
  }
  for (uint64_t q : special_moduli) {
    absl::Status s = CheckModulus(q, ring_degree, "special modulus");
    if (!s.ok()) return s;
    if (!seen.insert(q).second) {
      return StructuralError(absl::StrCat("modulus ", q, " repeated"));
    }
  }
  if (!(log2_scale > 0)) return StructuralError("log2Scale must be positive");
  if (!(ternary_density > 0 && ternary_density <= 1)) {
    return StructuralError("ternaryDensity must lie in (0, 1]");
  }
  if (!(gaussian_sigma > 0)) return StructuralError("gaussianSigma must be > 0");
  if (!(smudge_sigma > 0)) return StructuralError("smudgeSigma must be > 0");
  return absl::OkStatus();
}

Seed CryptoParams::Hash() const {
  std::string canonical = ParamsToJson(*this);
  return Sha256({reinterpret_cast<const uint8_t*>(canonical.data()),
                 canonical.size()});
}

std::string ParamsToJson(const CryptoParams& p) {
  json j;
  j["name"] = p.name;
  j["ringDegree"] = p.ring_degree;
  json moduli = json::array();
  for (uint64_t q : p.moduli) moduli.push_back(std::to_string(q));
  j["moduli"] = moduli;
  json special = json::array();
  for (uint64_t q : p.special_moduli) special.push_back(std::to_string(q));
  j["specialModuli"] = special;
  j["log2Scale"] = p.log2_scale;
  j["ternaryDensity"] = p.ternary_density;
  j["gaussianSigma"] = p.gaussian_sigma;
  j["smudgeSigma"] = p.smudge_sigma;
  j["crsSeed"] = ToHex(p.crs_seed);
  j["claimedSecurity"] = p.claimed_security;
  return j.dump(2);
}

absl::StatusOr<CryptoParams> ParseParamsJson(absl::string_view text) {
  json j = json::parse(std::string(text), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    return StructuralError("parameter file is not a JSON object");
  }
  CryptoParams p;
  try {
    p.name = j.value("name", std::string("custom"));
    p.ring_degree = j.at("ringDegree").get<size_t>();
    auto parse_list = [](const json& arr,
                         std::vector<uint64_t>& out) -> absl::Status {
      if (!arr.is_array()) return StructuralError("moduli must be an array");
      for (const auto& e : arr) {
        uint64_t q;
        if (!e.is_string() || !absl::SimpleAtoi(e.get<std::string>(), &q)) {
          return StructuralError("moduli must be decimal strings");
        }
        out.push_back(q);
      }
      return absl::OkStatus();
    };
    absl::Status s = parse_list(j.at("moduli"), p.moduli);
    if (!s.ok()) return s;
    s = parse_list(j.at("specialModuli"), p.special_moduli);
    if (!s.ok()) return s;
    p.log2_scale = j.at("log2Scale").get<double>();
    p.ternary_density = j.at("ternaryDensity").get<double>();
    p.gaussian_sigma = j.at("gaussianSigma").get<double>();
    p.smudge_sigma = j.at("smudgeSigma").get<double>();
    auto seed = FromHex(j.at("crsSeed").get<std::string>());
    if (!seed.ok()) return seed.status();
    if (seed->size() != p.crs_seed.size()) {
      return StructuralError("crsSeed must be 32 bytes");
    }
    std::copy(seed->begin(), seed->end(), p.crs_seed.begin());
    p.claimed_security = j.value("claimedSecurity", std::string());
  } catch (const json::exception& e) {
    return StructuralError(absl::StrCat("malformed parameter file: ", e.what()));
  }
  absl::Status s = p.Validate();
  if (!s.ok()) return s;
  return p;
}

absl::StatusOr<CryptoParams> LoadParams(const std::string& path) {
  std::ifstream in(path);
  if (!in) return IoError(absl::StrCat("cannot open ", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseParamsJson(ss.str());
}

absl::StatusOr<CryptoParams> Preset(absl::string_view name) {
  constexpr double kSigma = 3.2;
  if (name == "tiny") {
    return MakePreset("tiny", 16, {1073741441ull, 1073740609ull},
                      2147483489ull, 20, kSigma * (1 << 8),
                      "none (oracle tests only)");
  }
  if (name == "small") {
    return MakePreset("small", 2048,
                      {2305843009213616129ull, 4503599627481089ull,
                       4503599627542529ull, 4503599627554817ull,
                       4503599627575297ull},
                      4611686018427322369ull, 52, kSigma * (1 << 20),
                      "none (fast tests only)");
  }
  if (name == "paper8192") {
    return MakePreset("paper8192", 8192,
                      {2305843009213317121ull, 4503599627763713ull,
                       4503599627796481ull, 4503599627943937ull,
                       4503599628337153ull},
                      4611686018427322369ull, 52, kSigma * (1 << 20),
                      "unverified; no security estimate is performed");
  }
  return ConfigError(absl::StrCat("unknown parameter preset '", name, "'"));
}

std::vector<std::string> PresetNames() { return {"tiny", "small", "paper8192"}; }

absl::StatusOr<CryptoParams> ResolveParams(const std::string& preset_or_path) {
  auto preset = Preset(preset_or_path);
  if (preset.ok()) return preset;
  if (std::filesystem::exists(preset_or_path)) return LoadParams(preset_or_path);
  return ConfigError(absl::StrCat("'", preset_or_path,
                                  "' is neither a preset nor a file"));
}

}  // namespace vfi::ring
