#include "util.hpp"

namespace graminfer {

std::u32string utf8_decode(std::string_view text) {
  return utf8_decode_offsets(text).cps;
}

DecodedText utf8_decode_offsets(std::string_view text) {
  DecodedText out;
  out.cps.reserve(text.size());
  out.byte_offsets.reserve(text.size() + 1);
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    out.byte_offsets.push_back(i);
    unsigned char b0 = static_cast<unsigned char>(text[i]);
    char32_t cp = b0;
    size_t len = 1;
    if (b0 >= 0xF0 && b0 <= 0xF4)
      len = 4;
    else if (b0 >= 0xE0)
      len = 3;
    else if (b0 >= 0xC2)
      len = 2;
    if (len > 1) {
      if (i + len > n) len = 1;
      for (size_t k = 1; k < len; ++k) {
        if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
          len = 1;
          break;
        }
      }
    }
    if (len == 2) {
      cp = ((b0 & 0x1Fu) << 6) | (text[i + 1] & 0x3Fu);
    } else if (len == 3) {
      cp = ((b0 & 0x0Fu) << 12) | ((text[i + 1] & 0x3Fu) << 6) | (text[i + 2] & 0x3Fu);
    } else if (len == 4) {
      cp = ((b0 & 0x07u) << 18) | ((text[i + 1] & 0x3Fu) << 12) | ((text[i + 2] & 0x3Fu) << 6) |
           (text[i + 3] & 0x3Fu);
    }
    out.cps.push_back(cp);
    i += len;
  }
  out.byte_offsets.push_back(n);
  return out;
}

std::string utf8_encode_one(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string utf8_encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) out += utf8_encode_one(cp);
  return out;
}

std::string fnv1a_hex(std::string_view bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace graminfer
