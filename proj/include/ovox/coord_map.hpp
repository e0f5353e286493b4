#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace ovox {

/// Open-addressing hash map from packed 64-bit keys to 32-bit slots.
/// Linear probing, power-of-two capacity, no erase. The all-ones key is
/// reserved as the empty marker.
class CoordMap {
public:
    static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};

    CoordMap() = default;
    explicit CoordMap(std::size_t expected) { reserve(expected); }

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    void reserve(std::size_t expected) {
        std::size_t cap = 16;
        while (cap < expected * 2) cap <<= 1;
        if (cap > keys_.size()) rehash(cap);
    }

    /// Inserts key with value if absent. Returns the stored value and whether
    /// the insertion happened.
    std::pair<std::uint32_t, bool> try_emplace(std::uint64_t key, std::uint32_t value) {
        if ((size_ + 1) * 2 > keys_.size()) rehash(keys_.empty() ? 16 : keys_.size() * 2);
        std::size_t slot = probe(key);
        if (keys_[slot] == key) return {values_[slot], false};
        keys_[slot] = key;
        values_[slot] = value;
        ++size_;
        return {value, true};
    }

    const std::uint32_t* find(std::uint64_t key) const {
        if (keys_.empty()) return nullptr;
        const std::size_t slot = probe(key);
        return keys_[slot] == key ? &values_[slot] : nullptr;
    }

    bool contains(std::uint64_t key) const { return find(key) != nullptr; }

private:
    static std::uint64_t mix(std::uint64_t k) {
        k ^= k >> 30;
        k *= 0xbf58476d1ce4e5b9ull;
        k ^= k >> 27;
        k *= 0x94d049bb133111ebull;
        k ^= k >> 31;
        return k;
    }

    std::size_t probe(std::uint64_t key) const {
        const std::size_t mask = keys_.size() - 1;
        std::size_t slot = static_cast<std::size_t>(mix(key)) & mask;
        while (keys_[slot] != kEmpty && keys_[slot] != key) slot = (slot + 1) & mask;
        return slot;
    }

    void rehash(std::size_t cap) {
        std::vector<std::uint64_t> old_keys(cap, kEmpty);
        std::vector<std::uint32_t> old_values(cap, 0);
        old_keys.swap(keys_);
        old_values.swap(values_);
        for (std::size_t i = 0; i < old_keys.size(); ++i) {
            if (old_keys[i] == kEmpty) continue;
            const std::size_t slot = probe(old_keys[i]);
            keys_[slot] = old_keys[i];
            values_[slot] = old_values[i];
        }
    }

    std::vector<std::uint64_t> keys_;
    std::vector<std::uint32_t> values_;
    std::size_t size_ = 0;
};

}  // namespace ovox
