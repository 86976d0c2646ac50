#pragma once

// Generated from data/*; tests check the two stay byte-identical.

#include <string_view>

namespace parsitext::defaults {

inline constexpr std::string_view kNormalizationRules = R"pt(# Character normalization rules for Persian text.
# Format: SRC<TAB>DST, code points in hex. An empty DST deletes SRC.
# A SRC range FROM-TO with empty DST is stripped outright (diacritics, elongation).
# Anything after the second tab is a comment.
#
# Arabic letter variants -> Persian
064A	06CC	ARABIC LETTER YEH -> FARSI YEH
0649	06CC	ALEF MAKSURA -> FARSI YEH
0643	06A9	ARABIC LETTER KAF -> KEHEH
0629	0647	TEH MARBUTA -> HEH
06C0	0647	HEH WITH YEH ABOVE -> HEH
06D5	0647	AE -> HEH
06BE	0647	HEH DOACHASHMEE -> HEH
0623	0627	ALEF WITH HAMZA ABOVE -> ALEF
0625	0627	ALEF WITH HAMZA BELOW -> ALEF
0671	0627	ALEF WASLA -> ALEF
# Extended Arabic-Indic (Persian) digits -> ASCII
06F0	0030	PERSIAN DIGIT 0
06F1	0031	PERSIAN DIGIT 1
06F2	0032	PERSIAN DIGIT 2
06F3	0033	PERSIAN DIGIT 3
06F4	0034	PERSIAN DIGIT 4
06F5	0035	PERSIAN DIGIT 5
06F6	0036	PERSIAN DIGIT 6
06F7	0037	PERSIAN DIGIT 7
06F8	0038	PERSIAN DIGIT 8
06F9	0039	PERSIAN DIGIT 9
# Arabic-Indic digits -> ASCII
0660	0030	ARABIC-INDIC DIGIT 0
0661	0031	ARABIC-INDIC DIGIT 1
0662	0032	ARABIC-INDIC DIGIT 2
0663	0033	ARABIC-INDIC DIGIT 3
0664	0034	ARABIC-INDIC DIGIT 4
0665	0035	ARABIC-INDIC DIGIT 5
0666	0036	ARABIC-INDIC DIGIT 6
0667	0037	ARABIC-INDIC DIGIT 7
0668	0038	ARABIC-INDIC DIGIT 8
0669	0039	ARABIC-INDIC DIGIT 9
# Invisible formatting characters
200D		ZERO WIDTH JOINER
200E		LEFT-TO-RIGHT MARK
200F		RIGHT-TO-LEFT MARK
202A		LEFT-TO-RIGHT EMBEDDING
202B		RIGHT-TO-LEFT EMBEDDING
202C		POP DIRECTIONAL FORMATTING
202D		LEFT-TO-RIGHT OVERRIDE
202E		RIGHT-TO-LEFT OVERRIDE
FEFF		BYTE ORDER MARK
00AD		SOFT HYPHEN
# Stripped classes
064B-0652		ARABIC HARAKAT (short vowels, shadda, sukun)
0640-0640		TATWEEL
0670-0670		SUPERSCRIPT ALEF
0653-0655		MADDAH / HAMZA ABOVE / HAMZA BELOW
)pt";

inline constexpr std::string_view kAffixes = R"pt(# Suffixes that attach to the preceding word with ZWNJ when written space-separated.
# A second column "fused" also splits the suffix out of words written without a break.
# Lines starting with "!" are whole words that are never split.
هایشان	fused
هایتان	fused
هایمان	fused
هایی	fused
هایم	fused
هایت	fused
هایش	fused
های	fused
ها	fused
ترین
تر
!تنها
!تنهایی
)pt";

inline constexpr std::string_view kTransliteration = R"pt(# FEnglish (Persian written in Latin letters) -> Persian script.
# Multi-letter keys are matched greedily before single letters.
# Format: LATIN<TAB>PERSIAN
# Vowels: @LETTER<TAB>INITIAL<TAB>MEDIAL<TAB>LAST_SYLLABLE<TAB>FINAL, "-" = not written.
# LAST_SYLLABLE applies when exactly one consonant follows before the word ends.
# Ambiguous sounds resolve to the most frequent letter: gh -> غ (not ق), z -> ز (not ذ ض ظ).
kh	خ
sh	ش
ch	چ
gh	غ
zh	ژ
aa	ا
oo	و
ou	و
ee	ی
ei	ی
b	ب
p	پ
t	ت
s	س
j	ج
h	ه
d	د
r	ر
z	ز
f	ف
q	ق
k	ک
g	گ
l	ل
m	م
n	ن
v	و
w	و
y	ی
x	خ
c	ک
@a	ا	-	ا	ا
@e	ا	-	-	ه
@o	ا	و	و	و
@i	ای	ی	ی	ی
@u	او	و	و	و
)pt";

inline constexpr std::string_view kStopwords = R"pt(# High-frequency Persian function words, one per line.
و
در
به
از
که
این
آن
را
با
است
برای
تا
یک
هم
بر
یا
اما
اگر
چون
نیز
باید
شد
شده
بود
شود
کرد
کند
کنند
کرده
دارد
داشت
هست
هستم
هستند
من
تو
او
ما
شما
آنها
خود
همه
هر
چه
دیگر
بین
پس
پیش
روی
زیر
ولی
سپس
حتی
چنین
چند
چیزی
کسی
اینجا
آنجا
همین
همان
وی
)pt";

inline constexpr std::string_view kStemRules = R"pt(# Suffix stripping rules: SUFFIX<TAB>MIN_REMAINING_LENGTH (code points).
# Some suffixes begin with an invisible ZWNJ (U+200C). Rules are applied longest first.
‌ترین	2
ترین	3
‌های	2
‌ها	2
‌تر	2
‌ای	2
های	3
تر	3
ها	3
یی	2
)pt";

}  // namespace parsitext::defaults
