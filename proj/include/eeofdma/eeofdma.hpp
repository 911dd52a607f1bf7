/*
 * Copyright 2026 The eeofdma Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/// \file eeofdma/eeofdma.hpp
/// \brief Umbrella header.

#ifndef EEOFDMA_EEOFDMA_HPP
#define EEOFDMA_EEOFDMA_HPP

#include <eeofdma/baseline.hpp>
#include <eeofdma/harness.hpp>
#include <eeofdma/inner.hpp>
#include <eeofdma/matrix.hpp>
#include <eeofdma/model.hpp>
#include <eeofdma/oracle.hpp>
#include <eeofdma/report.hpp>
#include <eeofdma/sca.hpp>
#include <eeofdma/scenario.hpp>
#include <eeofdma/solver_gee.hpp>
#include <eeofdma/solver_prodee.hpp>
#include <eeofdma/solver_sumee.hpp>

#endif // EEOFDMA_EEOFDMA_HPP
