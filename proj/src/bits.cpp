#include "avowqc/bits.hpp"

#include <stdexcept>

#include "avowqc/errors.hpp"

namespace avowqc {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ParseError(std::string("invalid hex digit '") + c + "'");
}

}  // namespace

BitString BitString::from_hex(const std::string& hex) {
    BitString out;
    out.bits_.reserve(hex.size() * 4);
    for (char c : hex) {
        int v = hex_value(c);
        for (int b = 3; b >= 0; --b) out.bits_.push_back(static_cast<uint8_t>((v >> b) & 1));
    }
    return out;
}

BitString BitString::from_string(const std::string& zeros_and_ones) {
    BitString out;
    out.bits_.reserve(zeros_and_ones.size());
    for (char c : zeros_and_ones) {
        if (c != '0' && c != '1') throw ParseError("bit string must contain only 0 and 1");
        out.bits_.push_back(static_cast<uint8_t>(c - '0'));
    }
    return out;
}

BitString BitString::random(CounterRng& rng, std::size_t length) {
    BitString out;
    out.bits_.reserve(length);
    for (std::size_t i = 0; i < length; ++i) out.bits_.push_back(static_cast<uint8_t>(rng.next_bit()));
    return out;
}

void BitString::append(const BitString& other) {
    bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

void BitString::append_uint(uint64_t value, int nbits) {
    for (int b = nbits - 1; b >= 0; --b) bits_.push_back(static_cast<uint8_t>((value >> b) & 1));
}

uint64_t BitString::read_uint(std::size_t pos, int nbits) const {
    if (pos + static_cast<std::size_t>(nbits) > bits_.size()) throw DimensionError("read_uint past end of bit string");
    uint64_t v = 0;
    for (int b = 0; b < nbits; ++b) v = (v << 1) | bits_[pos + static_cast<std::size_t>(b)];
    return v;
}

BitString BitString::slice(std::size_t pos, std::size_t length) const {
    if (pos + length > bits_.size()) throw DimensionError("slice past end of bit string");
    BitString out;
    out.bits_.assign(bits_.begin() + static_cast<std::ptrdiff_t>(pos),
                     bits_.begin() + static_cast<std::ptrdiff_t>(pos + length));
    return out;
}

BitString BitString::operator^(const BitString& other) const {
    if (size() != other.size()) throw DimensionError("xor of bit strings of different length");
    BitString out;
    out.bits_.resize(size());
    for (std::size_t i = 0; i < size(); ++i) out.bits_[i] = bits_[i] ^ other.bits_[i];
    return out;
}

std::size_t BitString::hamming_distance(const BitString& other) const {
    if (size() != other.size()) throw DimensionError("hamming distance of different lengths");
    std::size_t d = 0;
    for (std::size_t i = 0; i < size(); ++i) d += static_cast<std::size_t>(bits_[i] != other.bits_[i]);
    return d;
}

std::string BitString::to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve((bits_.size() + 3) / 4);
    for (std::size_t i = 0; i < bits_.size(); i += 4) {
        int v = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            v <<= 1;
            if (i + j < bits_.size()) v |= bits_[i + j];
        }
        out.push_back(digits[v]);
    }
    return out;
}

std::string BitString::to_string() const {
    std::string out;
    out.reserve(bits_.size());
    for (uint8_t b : bits_) out.push_back(static_cast<char>('0' + b));
    return out;
}

std::vector<uint8_t> BitString::to_bytes_left_padded() const {
    const std::size_t pad = (8 - bits_.size() % 8) % 8;
    std::vector<uint8_t> out((bits_.size() + pad) / 8, 0);
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        const std::size_t pos = pad + i;
        if (bits_[i]) out[pos / 8] |= static_cast<uint8_t>(0x80u >> (pos % 8));
    }
    return out;
}

}  // namespace avowqc
