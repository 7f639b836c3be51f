// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/evm/word.hpp>

namespace rescan::test
{
/// Seven-block orphan-jump layout. Block 3 pushes 0x0D and leaves it unused,
/// jumps via block 5 to block 6, whose bare JUMP consumes that 0x0D.
///
///   b0 @00  PUSH1 07 JUMP
///   b1 @03  JUMPDEST STOP
///   b2 @05  JUMPDEST STOP
///   b3 @07  JUMPDEST PUSH1 0D PUSH1 0F JUMP
///   b4 @0D  JUMPDEST STOP
///   b5 @0F  JUMPDEST PUSH1 13 JUMP
///   b6 @13  JUMPDEST JUMP
inline bytes orphan_jump_fixture()
{
    return from_hex("600756" "5b00" "5b00" "5b600d600f56" "5b00" "5b601356" "5b56");
}

}  // namespace rescan::test
