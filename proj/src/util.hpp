#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace graminfer {

// Value-or-error return type used across the library. Errors produced by the
// grammar engine and the pipeline are ordinary data (they get fed back to the
// LLM or serialized into reports), so fallible operations return a Result
// instead of throwing.
template <typename T, typename E>
class Result {
 public:
  Result(T value) : v_(std::in_place_index<0>, std::move(value)) {}
  Result(E error) : v_(std::in_place_index<1>, std::move(error)) {}

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  T& value() & { return std::get<0>(v_); }
  const T& value() const& { return std::get<0>(v_); }
  T&& take() && { return std::get<0>(std::move(v_)); }

  E& error() & { return std::get<1>(v_); }
  const E& error() const& { return std::get<1>(v_); }

 private:
  std::variant<T, E> v_;
};

// Same-type payloads need explicit construction.
template <typename T>
class Result<T, T> {
 public:
  static Result ok(T value) { return Result(0, std::move(value)); }
  static Result err(T error) { return Result(1, std::move(error)); }

  bool ok() const { return index_ == 0; }
  explicit operator bool() const { return ok(); }

  T& value() & { return v_; }
  const T& value() const& { return v_; }
  T&& take() && { return std::move(v_); }

  T& error() & { return v_; }
  const T& error() const& { return v_; }

 private:
  Result(int index, T value) : index_(index), v_(std::move(value)) {}
  int index_;
  T v_;
};

// Thrown on caller contract violations (e.g. correct > total); these are
// programming errors, not run data.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// --- UTF-8 <-> code point helpers -------------------------------------------

// Decodes UTF-8 into code points. Invalid bytes are decoded as their own
// code point value (latin-1 fallback) so arbitrary input never aborts a run.
std::u32string utf8_decode(std::string_view text);

std::string utf8_encode(std::u32string_view cps);
std::string utf8_encode_one(char32_t cp);

// Decoded code points plus the byte offset where each one starts. The offset
// vector has one trailing entry equal to text.size().
struct DecodedText {
  std::u32string cps;
  std::vector<size_t> byte_offsets;
};
DecodedText utf8_decode_offsets(std::string_view text);

// FNV-1a over bytes, used for prompt audit hashes in run reports.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace graminfer
