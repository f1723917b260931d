#include "isneak/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "isneak/error.hpp"

namespace isneak {
namespace {

Bin combine(const Bin& a, const Bin& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi), a.n + b.n, a.sum + b.sum, a.sum_sq + b.sum_sq};
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

}  // namespace

double Bin::sd() const {
  if (n == 0) return 0.0;
  const double m = mean();
  const double var = sum_sq / static_cast<double>(n) - m * m;
  return var > 0.0 ? std::sqrt(var) : 0.0;
}

std::vector<Bin> equal_width_bins(std::span<const double> values, std::size_t bins) {
  require(!values.empty(), "binning needs at least one value");
  require(bins >= 1, "bin count must be positive");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) {
    Bin only{lo, hi, 0, 0.0, 0.0};
    for (double v : values) {
      ++only.n;
      only.sum += v;
      only.sum_sq += v * v;
    }
    return {only};
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<Bin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + width * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    b = std::min(b, bins - 1);
    out[b].n += 1;
    out[b].sum += v;
    out[b].sum_sq += v * v;
  }
  return out;
}

bool merge_predicate(const Bin& i, const Bin& j) {
  if (i.n == 0 || j.n == 0) return true;
  const Bin k = combine(i, j);
  const double nk = static_cast<double>(k.n);
  const double bound = (static_cast<double>(i.n) / nk) * i.sd() + (static_cast<double>(j.n) / nk) * j.sd();
  // Rounding slack so that identical constant bins compare equal.
  const double slack = 1e-9 * std::max({1.0, std::fabs(k.mean()), bound});
  return k.sd() <= bound + slack;
}

std::vector<Bin> merge_bins(std::vector<Bin> bins) {
  bool changed = true;
  while (changed && bins.size() > 1) {
    changed = false;
    for (std::size_t i = 0; i + 1 < bins.size(); ++i) {
      if (merge_predicate(bins[i], bins[i + 1])) {
        bins[i] = combine(bins[i], bins[i + 1]);
        bins.erase(bins.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        changed = true;
        break;
      }
    }
  }
  return bins;
}

std::size_t AttributeEncoding::domain_size() const {
  switch (kind) {
    case AttributeKind::boolean: return 2;
    case AttributeKind::numeric: return bins.size();
    case AttributeKind::categorical: return symbols.size();
  }
  return 0;
}

std::string AttributeEncoding::label(std::size_t value) const {
  switch (kind) {
    case AttributeKind::boolean:
      return value ? "true" : "false";
    case AttributeKind::numeric: {
      const Bin& b = bins.at(value);
      const bool last = value + 1 == bins.size();
      if (b.lo == b.hi) return format_number(b.lo);
      return "[" + format_number(b.lo) + ", " + format_number(b.hi) + (last ? "]" : ")");
    }
    case AttributeKind::categorical:
      return symbols.at(value);
  }
  return {};
}

std::size_t EncodingScheme::value_index(std::size_t attribute, double raw) const {
  const auto& enc = attributes.at(attribute);
  switch (enc.kind) {
    case AttributeKind::boolean:
      return raw != 0.0 ? 1 : 0;
    case AttributeKind::categorical: {
      const auto idx = static_cast<std::size_t>(raw);
      if (raw < 0 || idx >= enc.symbols.size()) {
        throw Error(ErrorCode::out_of_range, "unknown symbol for attribute '" + enc.name + "'");
      }
      return idx;
    }
    case AttributeKind::numeric: {
      const auto& bins = enc.bins;
      if (raw < bins.front().lo || raw > bins.back().hi) {
        throw Error(ErrorCode::out_of_range,
                    "value " + format_number(raw) + " outside encoded range of '" + enc.name + "'");
      }
      for (std::size_t b = 0; b + 1 < bins.size(); ++b) {
        if (raw < bins[b].hi) return b;
      }
      return bins.size() - 1;
    }
  }
  return 0;
}

EncodingScheme build_scheme(const CandidatePool& pool, std::size_t bins) {
  require(pool.size() > 0, "cannot encode an empty pool");
  EncodingScheme scheme;
  std::vector<double> column;
  for (std::size_t a = 0; a < pool.attributes.size(); ++a) {
    const auto& attr = pool.attributes[a];
    AttributeEncoding enc;
    enc.name = attr.name;
    enc.kind = attr.kind;
    enc.first_column = scheme.columns();
    switch (attr.kind) {
      case AttributeKind::boolean:
        enc.column_count = 1;
        break;
      case AttributeKind::categorical:
        enc.symbols = attr.symbols;
        enc.column_count = enc.symbols.size();
        break;
      case AttributeKind::numeric:
        column.clear();
        for (const auto& c : pool.candidates) column.push_back(c.values[a]);
        enc.bins = merge_bins(equal_width_bins(column, bins));
        enc.column_count = enc.bins.size();
        break;
    }
    for (std::size_t k = 0; k < enc.column_count; ++k) scheme.column_attribute.push_back(a);
    scheme.attributes.push_back(std::move(enc));
  }
  return scheme;
}

EncodedPool encode_pool(const CandidatePool& pool, const EncodingScheme& scheme) {
  require(scheme.attributes.size() == pool.attributes.size(), "scheme does not match pool schema");
  EncodedPool out;
  out.scheme = scheme;
  out.bits = BitMatrix(pool.size(), scheme.columns());
  out.value_of.assign(pool.size(), std::vector<std::uint32_t>(scheme.attributes.size(), 0));
  for (std::size_t r = 0; r < pool.size(); ++r) {
    const auto& values = pool.candidates[r].values;
    for (std::size_t a = 0; a < scheme.attributes.size(); ++a) {
      const auto& enc = scheme.attributes[a];
      const std::size_t v = scheme.value_index(a, values[a]);
      out.value_of[r][a] = static_cast<std::uint32_t>(v);
      if (enc.kind == AttributeKind::boolean) {
        if (v) out.bits.set(r, enc.first_column);
      } else {
        out.bits.set(r, enc.first_column + v);
      }
    }
  }
  return out;
}

EncodedPool encode_pool(const CandidatePool& pool, std::size_t bins) {
  return encode_pool(pool, build_scheme(pool, bins));
}

std::string scheme_json(const EncodingScheme& scheme) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& enc : scheme.attributes) {
    nlohmann::json a{{"name", enc.name}, {"first_column", enc.first_column},
                     {"columns", enc.column_count}};
    switch (enc.kind) {
      case AttributeKind::boolean:
        a["kind"] = "boolean";
        break;
      case AttributeKind::categorical:
        a["kind"] = "categorical";
        a["symbols"] = enc.symbols;
        break;
      case AttributeKind::numeric:
        a["kind"] = "numeric";
        a["bins"] = nlohmann::json::array();
        for (const auto& b : enc.bins) {
          a["bins"].push_back({{"lo", b.lo}, {"hi", b.hi}, {"n", b.n}, {"sd", b.sd()}});
        }
        break;
    }
    doc.push_back(std::move(a));
  }
  return nlohmann::json{{"attributes", doc}}.dump(2);
}

}  // namespace isneak
