// Copyright 2026-present the docret project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <gtest/gtest.h>

#include "docret/error.hpp"

#define EXPECT_DOCRET_ERROR(statement, error_code)                                               \
  do {                                                                                           \
    try {                                                                                        \
      statement;                                                                                 \
      ADD_FAILURE() << "expected " << docret::to_string(error_code) << " from " #statement;      \
    } catch (const docret::Error& e_) {                                                          \
      EXPECT_EQ(e_.code(), error_code) << e_.what();                                             \
    }                                                                                            \
  } while (0)
