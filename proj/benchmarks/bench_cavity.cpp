// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>
