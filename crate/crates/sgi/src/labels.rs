//! Label-conversion tables.
//!
//! Vertices carry a different label at each partition level: a position
//! within their subregion, within their region, and within the whole graph.
//! Boundary vertices belong to several groups at once, so the conversions
//! are not mere offsets.  A [`LevelTable`] converts a (group, in-group
//! position) pair to the level's own label using three succinct pieces:
//!
//! * `sizes` — group sizes in unary (`1 0^{s_1} 1 0^{s_2} …`); one select
//!   finds where a group's slot run begins,
//! * `dup` — one flag per slot, set when the slot's vertex already appeared
//!   in an earlier group (first occurrences define the level's labels),
//! * `spill` — the label of every duplicate slot, packed at fixed width.
//!
//! Duplicates are rare (only group-boundary vertices repeat), so `dup` is
//! nearly all zeros and `spill` is short; both serialize sublinearly in the
//! vertex count.  Vertices appearing in no group (interior to the higher
//! level's separator) take the remaining labels in ascending id order, and
//! are never the subject of a conversion.

use crate::bitvec::{BitVec, FixedVec, RankSelect};
use crate::error::{Result, SgiError};
use std::cell::Cell;

thread_local! {
    static PRIMITIVES: Cell<u64> = const { Cell::new(0) };
}

/// Total rank/select/access primitive calls made by label conversions on
/// this thread; pair two snapshots to cost an operation.
pub fn primitive_count() -> u64 {
    PRIMITIVES.with(|c| c.get())
}

fn bump() {
    PRIMITIVES.with(|c| c.set(c.get() + 1));
}

/// One level's conversion table: (group id, position within group) → label.
#[derive(Debug, Clone)]
pub struct LevelTable {
    /// Group sizes in unary; ones mark group starts.
    sizes: RankSelect,
    /// Per slot: was this slot's vertex already seen in an earlier slot?
    dup: RankSelect,
    /// Labels of the duplicate slots, in slot order.
    spill: FixedVec,
    /// Distinct vertices at this level.
    n_verts: u32,
    /// Number of groups.
    groups_n: u32,
}

impl LevelTable {
    /// Builds the table from each group's members (ids in `0..universe`)
    /// listed in group-label order.  Labels are assigned by first visit
    /// across the concatenated groups, then ascending over unseen ids.
    ///
    /// Returns the table plus both directions of the assignment:
    /// label → id and id → label.
    pub fn build(groups: &[Vec<u32>], universe: usize) -> Result<(Self, Vec<u32>, Vec<u32>)> {
        if groups.is_empty() {
            return Err(SgiError::ParamError("level table needs at least one group".into()));
        }
        let slot_count: usize = groups.iter().map(|g| g.len()).sum();
        if slot_count == 0 {
            return Err(SgiError::ParamError("level table needs at least one slot".into()));
        }
        let mut size_bits = BitVec::new();
        for g in groups {
            size_bits.push(true);
            for _ in g {
                size_bits.push(false);
            }
        }
        let mut id_to_label = vec![u32::MAX; universe];
        let mut label_to_id = Vec::with_capacity(universe);
        let mut dup_bits = BitVec::new();
        let spill_width = FixedVec::width_for(universe);
        let mut spill = FixedVec::new(spill_width);
        for g in groups {
            for &id in g {
                if (id as usize) >= universe {
                    return Err(SgiError::IdOutOfRange {
                        what: "group member",
                        got: id as u64,
                        max: universe as u64 - 1,
                    });
                }
                let known = id_to_label[id as usize];
                if known == u32::MAX {
                    id_to_label[id as usize] = label_to_id.len() as u32;
                    label_to_id.push(id);
                    dup_bits.push(false);
                } else {
                    dup_bits.push(true);
                    spill.push(known as u64);
                }
            }
        }
        for id in 0..universe as u32 {
            if id_to_label[id as usize] == u32::MAX {
                id_to_label[id as usize] = label_to_id.len() as u32;
                label_to_id.push(id);
            }
        }
        debug_assert_eq!(label_to_id.len(), universe);
        debug_assert_eq!(dup_bits.len(), slot_count);
        let table = LevelTable {
            sizes: RankSelect::build_auto(&size_bits)?,
            dup: RankSelect::build_auto(&dup_bits)?,
            spill,
            n_verts: universe as u32,
            groups_n: groups.len() as u32,
        };
        Ok((table, label_to_id, id_to_label))
    }

    /// Converts a 1-based group id and 0-based in-group position to the
    /// level's 0-based label.
    pub fn to_label(&self, group: u32, k: u32) -> Result<u32> {
        if group == 0 || group > self.groups_n {
            return Err(SgiError::IdOutOfRange {
                what: "group id",
                got: group as u64,
                max: self.groups_n as u64,
            });
        }
        // Slots of this group sit between its unary marker and the next.
        bump();
        let start = self.sizes.select(true, group as usize)?;
        bump();
        let end = if group == self.groups_n {
            self.sizes.len() + 1
        } else {
            self.sizes.select(true, group as usize + 1)?
        };
        let size = (end - start - 1) as u32;
        if k >= size {
            return Err(SgiError::IdOutOfRange {
                what: "group position",
                got: k as u64,
                max: size.wrapping_sub(1) as u64,
            });
        }
        let slot = start - group as usize + k as usize + 1; // 1-based over all slots
        bump();
        let is_dup = self.dup.access(slot)?;
        bump();
        let dups_through = self.dup.rank(true, slot)?;
        if is_dup {
            Ok(self.spill.get(dups_through - 1) as u32)
        } else {
            Ok((slot - dups_through - 1) as u32)
        }
    }

    /// Size of one group (1-based id).
    pub fn group_size(&self, group: u32) -> Result<u32> {
        if group == 0 || group > self.groups_n {
            return Err(SgiError::IdOutOfRange {
                what: "group id",
                got: group as u64,
                max: self.groups_n as u64,
            });
        }
        bump();
        let start = self.sizes.select(true, group as usize)?;
        bump();
        let end = if group == self.groups_n {
            self.sizes.len() + 1
        } else {
            self.sizes.select(true, group as usize + 1)?
        };
        Ok((end - start - 1) as u32)
    }

    /// Number of groups at this level.
    pub fn groups(&self) -> u32 {
        self.groups_n
    }

    /// Distinct vertices at this level.
    pub fn n_verts(&self) -> u32 {
        self.n_verts
    }

    /// Total slots (sum of group sizes).
    pub fn slots(&self) -> usize {
        self.dup.len()
    }

    /// In-memory payload bits across the three pieces.
    pub fn size_bits(&self) -> u64 {
        self.sizes.size_bits() + self.dup.size_bits() + self.spill.bits()
    }

    /// Serializes the three pieces as container records.
    pub fn to_records(&self) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
        (self.sizes.to_record(), self.dup.to_record(), self.spill.to_record())
    }

    /// Rebuilds a table from its three records plus the directory facts.
    pub fn from_records(
        sizes: &[u8],
        dup: &[u8],
        spill: &[u8],
        n_verts: u32,
        groups_n: u32,
    ) -> Result<Self> {
        let bad = |what: String| SgiError::Container(what);
        let (sizes, _) = RankSelect::from_record(sizes)?;
        let (dup, _) = RankSelect::from_record(dup)?;
        let (spill, _) = FixedVec::from_record(spill)?;
        if sizes.ones() != groups_n as usize {
            return Err(bad(format!(
                "label table: {} group markers, directory says {groups_n}",
                sizes.ones()
            )));
        }
        if sizes.len() != groups_n as usize + dup.len() {
            return Err(bad(format!(
                "label table: unary length {} inconsistent with {} groups + {} slots",
                sizes.len(),
                groups_n,
                dup.len()
            )));
        }
        if spill.len() != dup.ones() {
            return Err(bad(format!(
                "label table: {} spilled labels for {} duplicate slots",
                spill.len(),
                dup.ones()
            )));
        }
        if spill.width() != FixedVec::width_for(n_verts as usize) {
            return Err(bad(format!(
                "label table: spill width {} for universe {n_verts}",
                spill.width()
            )));
        }
        Ok(LevelTable { sizes, dup, spill, n_verts, groups_n })
    }
}

/// Both conversion levels: entry 0 is the top (region → graph) table, the
/// rest are per-region (subregion → region) tables.
#[derive(Debug, Clone)]
pub struct LabelTables {
    /// Region-label → graph-label conversion.
    pub top: LevelTable,
    /// Per-region subregion-label → region-label conversions.
    pub regions: Vec<LevelTable>,
}

impl LabelTables {
    /// Converts a subregion-label to its region-label: region `i` and
    /// subregion `j` are 1-based, the label `k` is 0-based.
    pub fn sub_to_region(&self, i: u32, j: u32, k: u32) -> Result<u32> {
        let table = self.region_table(i)?;
        table.to_label(j, k)
    }

    /// Converts a region-label to its graph-label: region `i` is 1-based,
    /// the label `k` is 0-based.
    pub fn region_to_graph(&self, i: u32, k: u32) -> Result<u32> {
        self.top.to_label(i, k)
    }

    /// The conversion table of region `i` (1-based).
    pub fn region_table(&self, i: u32) -> Result<&LevelTable> {
        if i == 0 || i as usize > self.regions.len() {
            return Err(SgiError::IdOutOfRange {
                what: "region id",
                got: i as u64,
                max: self.regions.len() as u64,
            });
        }
        Ok(&self.regions[i as usize - 1])
    }

    /// Total in-memory payload bits.
    pub fn size_bits(&self) -> u64 {
        self.top.size_bits() + self.regions.iter().map(LevelTable::size_bits).sum::<u64>()
    }
}
