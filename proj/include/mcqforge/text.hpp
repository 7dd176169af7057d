#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include <unicode/brkiter.h>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace mcqforge::text {

namespace detail {

inline icu::UnicodeString to_unicode(std::string_view s) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

inline std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

inline icu::UnicodeString nfc(const icu::UnicodeString& u) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) return u;
  icu::UnicodeString out = normalizer->normalize(u, status);
  return U_FAILURE(status) ? u : out;
}

}  // namespace detail

inline bool is_space(UChar32 c) { return u_isUWhiteSpace(c) != 0; }

/// Unicode NFC composition.
inline std::string nfc(std::string_view s) {
  return detail::to_utf8(detail::nfc(detail::to_unicode(s)));
}

/// Strips leading and trailing Unicode whitespace.
inline std::string trim(std::string_view s) {
  const icu::UnicodeString u = detail::to_unicode(s);
  int32_t begin = 0;
  int32_t end = u.length();
  while (begin < end && is_space(u.char32At(begin))) begin = u.moveIndex32(begin, 1);
  while (end > begin) {
    const int32_t prev = u.moveIndex32(end, -1);
    if (!is_space(u.char32At(prev))) break;
    end = prev;
  }
  icu::UnicodeString sub;
  u.extract(begin, end - begin, sub);
  return detail::to_utf8(sub);
}

inline bool is_blank(std::string_view s) { return trim(s).empty(); }

/// NFC, then trim, then collapse every internal whitespace run to one space.
/// Two strings are "the same option" iff their normalized forms are equal.
inline std::string normalize(std::string_view s) {
  const icu::UnicodeString u = detail::nfc(detail::to_unicode(s));
  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < u.length(); i = u.moveIndex32(i, 1)) {
    const UChar32 c = u.char32At(i);
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && out.length() > 0) out.append(static_cast<UChar>(u' '));
    pending_space = false;
    out.append(c);
  }
  return detail::to_utf8(out);
}

inline std::size_t codepoint_length(std::string_view s) {
  const icu::UnicodeString u = detail::to_unicode(s);
  return static_cast<std::size_t>(u.countChar32());
}

/// Number of word segments (letters, digits, ideographs) under the default
/// Unicode word-boundary rules. Punctuation and whitespace segments do not
/// count.
inline std::size_t count_words(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::BreakIterator> it(
      icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
  if (U_FAILURE(status)) return 0;
  const icu::UnicodeString u = detail::to_unicode(s);
  it->setText(u);
  std::size_t words = 0;
  for (int32_t end = it->next(); end != icu::BreakIterator::DONE; end = it->next()) {
    if (it->getRuleStatus() != UBRK_WORD_NONE) ++words;
  }
  return words;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace mcqforge::text
