#pragma once

#include <span>
#include <vector>

#include "lockctl/io.hpp"

namespace lockctl {

// Locks each process holds at the start, indexed like Lss::processes.
using InitOwnership = std::vector<LockSet>;

// Throws InvalidOwnership on overlapping sets or locks outside T_p.
void validate_ownership(const Lss& lss, std::span<const LockSet> own);

// Document {process_id: [lock...]}; processes left out own nothing.
InitOwnership ownership_from_json(const Lss& lss, const json& doc);
json ownership_to_json(const Lss& lss, std::span<const LockSet> own);

// Equivalent system without initial ownership. Each process gets a fresh key lock and an
// uncontrollable prologue that takes its initial locks, cycles through the other keys and
// finally keeps its own key; every prologue state can idle on a nop loop.
Lss transform_init(const Lss& lss, std::span<const LockSet> own);

}  // namespace lockctl
